use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three sequence norms supported on `ℝ^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormTag {
    L1,
    L2,
    Linf,
}

impl NormTag {
    pub fn dual(self) -> NormTag {
        match self {
            NormTag::L1 => NormTag::Linf,
            NormTag::L2 => NormTag::L2,
            NormTag::Linf => NormTag::L1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NormTag::L1 => "l1",
            NormTag::L2 => "l2",
            NormTag::Linf => "linf",
        }
    }

    /// Evaluates the norm of a slice.
    pub fn eval(self, v: &[f64]) -> f64 {
        match self {
            NormTag::L1 => v.iter().map(|x| x.abs()).sum(),
            NormTag::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            NormTag::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    /// Operator norm of `m` as a map from `(ℝ^k, ‖·‖₂)` into `(ℝ^m, self)`.
    pub fn from_l2_operator_norm(self, m: &DMatrix<f64>) -> f64 {
        match self {
            NormTag::L2 => crate::numerics::spectral_norm(m),
            NormTag::Linf => m
                .row_iter()
                .map(|r| r.norm())
                .fold(0.0, f64::max),
            NormTag::L1 => {
                // sup over sign vectors s of ‖mᵀ s‖₂
                let rows = m.nrows();
                if rows > 20 {
                    return m.row_iter().map(|r| r.norm()).sum();
                }
                let mut best: f64 = 0.0;
                for mask in 0u64..(1u64 << rows.saturating_sub(1)) {
                    let mut acc = DVector::zeros(m.ncols());
                    for i in 0..rows {
                        let s = if i > 0 && (mask >> (i - 1)) & 1 == 1 { -1.0 } else { 1.0 };
                        acc += m.row(i).transpose() * s;
                    }
                    best = best.max(acc.norm());
                }
                best
            }
        }
    }

    /// Operator norm of `b` as a map from `(ℝ^m, self)` into `(ℝ^k, ‖·‖₂)`.
    ///
    /// For `Linf` with more than 16 columns the exact sign enumeration is
    /// replaced by the upper bound `√m·σ_max(b)`.
    pub fn into_l2_operator_norm(self, b: &DMatrix<f64>) -> f64 {
        match self {
            NormTag::L2 => crate::numerics::spectral_norm(b),
            NormTag::L1 => b
                .column_iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max),
            NormTag::Linf => {
                let cols = b.ncols();
                if cols > 16 {
                    return (cols as f64).sqrt() * crate::numerics::spectral_norm(b);
                }
                let mut best: f64 = 0.0;
                for mask in 0u64..(1u64 << cols.saturating_sub(1)) {
                    let mut acc = DVector::zeros(b.nrows());
                    for j in 0..cols {
                        let s = if j > 0 && (mask >> (j - 1)) & 1 == 1 { -1.0 } else { 1.0 };
                        acc += b.column(j) * s;
                    }
                    best = best.max(acc.norm());
                }
                best
            }
        }
    }
}

impl std::fmt::Display for NormTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for NormTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(NormTag::L1),
            "l2" => Ok(NormTag::L2),
            "linf" | "l_inf" | "inf" => Ok(NormTag::Linf),
            other => Err(Error::Parse(format!("unknown norm '{other}'"))),
        }
    }
}

pub fn norm_eval(v: &DVector<f64>, t: NormTag) -> f64 {
    t.eval(v.as_slice())
}

/// A linear functional given by its coefficient vector, measured in `dual_norm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Functional {
    #[serde(with = "crate::serde_util::dvec")]
    pub coefficients: DVector<f64>,
    pub dual_norm: NormTag,
}

impl Functional {
    pub fn new(coefficients: DVector<f64>, dual_norm: NormTag) -> Self {
        Self {
            coefficients,
            dual_norm,
        }
    }

    /// Coordinate evaluation `x ↦ x_i` in dimension `dim`.
    pub fn dirac(i: usize, dim: usize, dual_norm: NormTag) -> Self {
        let mut c = DVector::zeros(dim);
        c[i] = 1.0;
        Self::new(c, dual_norm)
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn apply(&self, x: &DVector<f64>) -> f64 {
        self.coefficients.dot(x)
    }

    pub fn norm(&self) -> f64 {
        norm_eval(&self.coefficients, self.dual_norm)
    }

    /// Pulls the functional back through a matrix: `λ ∘ M`.
    pub fn compose(&self, m: &DMatrix<f64>, dual_norm: NormTag) -> Functional {
        Functional::new(m.transpose() * &self.coefficients, dual_norm)
    }
}

/// Returns `λ` with `‖λ‖_{dual(t)} ≤ 1` and `λ(y) = ‖y‖_t`.
///
/// `Linf` picks the smallest index among the maximizing coordinates; `L1`
/// uses sign `+1` on zero coordinates.
pub fn norming_functional(y: &DVector<f64>, t: NormTag) -> Result<Functional> {
    let norm = norm_eval(y, t);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    let coefficients = match t {
        NormTag::L2 => y / norm,
        NormTag::L1 => y.map(|v| if v < 0.0 { -1.0 } else { 1.0 }),
        NormTag::Linf => {
            let mut idx = 0;
            let mut best = -1.0;
            for (i, v) in y.iter().enumerate() {
                if v.abs() > best {
                    best = v.abs();
                    idx = i;
                }
            }
            let mut c = DVector::zeros(y.len());
            c[idx] = y[idx].signum();
            c
        }
    };
    Ok(Functional::new(coefficients, t.dual()))
}
