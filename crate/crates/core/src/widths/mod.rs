//! Two-sided bounds for Gelfand, Kolmogorov, Bernstein, Hilbert and
//! approximation numbers of an operator on a convex body.
//!
//! Widths use the 0-based index: `c_0` is half the diameter of `S(F)`.

mod approximation;
mod bernstein;
mod context;
mod gelfand;
mod hilbert;
mod kolmogorov;
mod singular;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::SearchConfig;
use crate::spaces::{Functional, Instance};

pub use approximation::{affine_error, approximation, AffineFit};
pub use bernstein::bernstein;
pub use gelfand::{gelfand, kernel_value};
pub use hilbert::hilbert;
pub use kolmogorov::{kolmogorov, kolmogorov_distance, shifted_kolmogorov, shifted_kolmogorov_distance};
pub use singular::singular_widths;

pub(crate) use context::Context;

/// Slack allowed between a lower and an upper bound before they are
/// considered inconsistent.
pub const ORDER_TOL: f64 = 1e-7;

/// Largest gap for which a two-sided bound is reported as exact.
pub const EXACT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WidthKind {
    Gelfand,
    Kolmogorov,
    Bernstein,
    Hilbert,
    Approximation,
}

impl WidthKind {
    pub const ALL: [WidthKind; 5] = [
        WidthKind::Gelfand,
        WidthKind::Kolmogorov,
        WidthKind::Bernstein,
        WidthKind::Hilbert,
        WidthKind::Approximation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WidthKind::Gelfand => "gelfand",
            WidthKind::Kolmogorov => "kolmogorov",
            WidthKind::Bernstein => "bernstein",
            WidthKind::Hilbert => "hilbert",
            WidthKind::Approximation => "approximation",
        }
    }
}

impl fmt::Display for WidthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WidthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gelfand" | "c" => Ok(WidthKind::Gelfand),
            "kolmogorov" | "d" => Ok(WidthKind::Kolmogorov),
            "bernstein" | "b" => Ok(WidthKind::Bernstein),
            "hilbert" | "h" => Ok(WidthKind::Hilbert),
            "approximation" | "a" => Ok(WidthKind::Approximation),
            other => Err(Error::Parse(format!("unknown width kind '{other}'"))),
        }
    }
}

/// Admissible information for Gelfand numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InfoClass {
    AllLinear,
    FiniteSet(Vec<Functional>),
}

impl InfoClass {
    /// Coordinate evaluations `x ↦ x_i` on `ℝ^dim`.
    pub fn standard(dim: usize, dual: crate::spaces::NormTag) -> InfoClass {
        InfoClass::FiniteSet((0..dim).map(|i| Functional::dirac(i, dim, dual)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if let InfoClass::FiniteSet(v) = self {
            if v.is_empty() {
                return Err(Error::Parse("finite information class is empty".into()));
            }
        }
        Ok(())
    }

    /// Exact coefficient match for finite sets; every functional for `AllLinear`.
    pub fn contains(&self, f: &Functional) -> bool {
        match self {
            InfoClass::AllLinear => true,
            InfoClass::FiniteSet(v) => v.iter().any(|g| g.coefficients == f.coefficients),
        }
    }
}

/// Data that lets a reader re-check one side of a bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    None,
    /// Closed-form value in a regime where the width is known exactly.
    ClosedForm { note: String },
    /// Functionals whose joint kernel gives the section value.
    Kernel { functionals: Vec<Vec<f64>> },
    /// Orthonormal basis (columns) of a subspace.
    Subspace { basis: Vec<Vec<f64>> },
    /// The affine subspace `shift + span(basis)`.
    ShiftedSubspace { basis: Vec<Vec<f64>>, shift: Vec<f64> },
    /// A ball `center + {v ∈ span(basis) : ‖S v‖ ≤ radius}` inside `F`.
    Ball {
        center: Vec<f64>,
        radius: f64,
        basis: Vec<Vec<f64>>,
    },
    /// `A`, `B` and shift `g` with `A(B_{ℓ2}) + g ⊆ F` and `‖B‖ ≤ 1`.
    Compression {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        shift: Vec<f64>,
    },
    /// `f ↦ offset + coefficients · (functionals · f)`.
    AffineMap {
        functionals: Vec<Vec<f64>>,
        coefficients: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
    /// Inherited from another width through a proven inequality.
    Implied { from: String },
}

pub(crate) fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    crate::serde_util::dmat::to_rows(m)
}

pub(crate) fn vec_of(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

/// Certified two-sided estimate of one width.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bounds {
    pub kind: WidthKind,
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
    pub lower_certified: bool,
    pub upper_certified: bool,
    pub exact: bool,
    pub lower_witness: Witness,
    pub upper_witness: Witness,
}

impl Bounds {
    pub(crate) fn new(kind: WidthKind, n: usize, lower: Side, upper: Side) -> Bounds {
        let mut b = Bounds {
            kind,
            n,
            lower: lower.value,
            upper: upper.value,
            lower_certified: lower.certified,
            upper_certified: upper.certified,
            exact: false,
            lower_witness: lower.witness,
            upper_witness: upper.witness,
        };
        b.refresh();
        b
    }

    pub(crate) fn refresh(&mut self) {
        if self.lower_certified && self.upper_certified && self.lower > self.upper && self.lower <= self.upper + ORDER_TOL {
            self.upper = self.lower;
        }
        self.exact = self.lower_certified && self.upper_certified && (self.upper - self.lower).abs() <= EXACT_TOL;
    }

    /// `true` when both sides are certified.
    pub fn certified(&self) -> bool {
        self.lower_certified && self.upper_certified
    }

    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }

    /// Certified lower bound (0 when the lower side is not certified).
    pub fn certified_lower(&self) -> f64 {
        if self.lower_certified {
            self.lower
        } else {
            0.0
        }
    }

    /// Certified upper bound (`+∞` when the upper side is not certified).
    pub fn certified_upper(&self) -> f64 {
        if self.upper_certified {
            self.upper
        } else {
            f64::INFINITY
        }
    }
}

/// One side of a bound while it is being assembled.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Side {
    pub value: f64,
    pub certified: bool,
    pub witness: Witness,
}

impl Side {
    pub fn new(value: f64, certified: bool, witness: Witness) -> Side {
        Side { value, certified, witness }
    }

    pub fn closed(value: f64, note: &str) -> Side {
        Side::new(value, true, Witness::ClosedForm { note: note.into() })
    }

    pub fn zero_lower() -> Side {
        Side::new(0.0, true, Witness::ClosedForm { note: "widths are nonnegative".into() })
    }

    pub fn unbounded() -> Side {
        Side::new(f64::INFINITY, false, Witness::None)
    }

    /// The larger of two lower bounds, preferring certified ones.
    pub fn max_lower(self, other: Side) -> Side {
        match (self.certified, other.certified) {
            (true, false) => self,
            (false, true) => other,
            _ => {
                if other.value > self.value {
                    other
                } else {
                    self
                }
            }
        }
    }

    /// The smaller of two upper bounds, preferring certified ones.
    pub fn min_upper(self, other: Side) -> Side {
        match (self.certified, other.certified) {
            (true, false) => self,
            (false, true) => other,
            _ => {
                if other.value < self.value {
                    other
                } else {
                    self
                }
            }
        }
    }
}

/// All five widths of one instance at one index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthSet {
    pub n: usize,
    pub gelfand: Bounds,
    pub kolmogorov: Bounds,
    pub bernstein: Bounds,
    pub hilbert: Bounds,
    pub approximation: Bounds,
}

impl WidthSet {
    /// Computes every width, sharing intermediate searches between them.
    pub fn compute(inst: &Instance, n: usize, cfg: &SearchConfig) -> Result<WidthSet> {
        let ctx = Context::new(inst, n, cfg);
        Ok(WidthSet {
            n,
            gelfand: ctx.gelfand_bounds()?,
            kolmogorov: ctx.kolmogorov_bounds()?,
            bernstein: ctx.bernstein_bounds()?,
            hilbert: ctx.hilbert_bounds()?,
            approximation: ctx.approximation_bounds()?,
        })
    }

    /// Computes a range of indices and tightens bounds with monotonicity in
    /// `n`: an upper bound at `n` also bounds every later index, a lower
    /// bound at `n` also bounds every earlier one.
    pub fn compute_range(inst: &Instance, ns: &[usize], cfg: &SearchConfig) -> Result<Vec<WidthSet>> {
        let mut sets: Vec<WidthSet> = ns.iter().map(|&n| WidthSet::compute(inst, n, cfg)).collect::<Result<_>>()?;
        sets.sort_by_key(|s| s.n);
        for kind in WidthKind::ALL {
            for i in 1..sets.len() {
                let prev = sets[i - 1].get(kind).clone();
                let cur = sets[i].get_mut(kind);
                if prev.upper_certified && (!cur.upper_certified || prev.upper < cur.upper) {
                    cur.upper = prev.upper;
                    cur.upper_certified = true;
                    cur.upper_witness = Witness::Implied {
                        from: format!("{} at n = {}", kind, prev.n),
                    };
                    cur.refresh();
                }
            }
            for i in (0..sets.len().saturating_sub(1)).rev() {
                let next = sets[i + 1].get(kind).clone();
                let cur = sets[i].get_mut(kind);
                if next.lower_certified && (!cur.lower_certified || next.lower > cur.lower) {
                    cur.lower = next.lower;
                    cur.lower_certified = true;
                    cur.lower_witness = Witness::Implied {
                        from: format!("{} at n = {}", kind, next.n),
                    };
                    cur.refresh();
                }
            }
        }
        Ok(sets)
    }

    pub fn get(&self, kind: WidthKind) -> &Bounds {
        match kind {
            WidthKind::Gelfand => &self.gelfand,
            WidthKind::Kolmogorov => &self.kolmogorov,
            WidthKind::Bernstein => &self.bernstein,
            WidthKind::Hilbert => &self.hilbert,
            WidthKind::Approximation => &self.approximation,
        }
    }

    fn get_mut(&mut self, kind: WidthKind) -> &mut Bounds {
        match kind {
            WidthKind::Gelfand => &mut self.gelfand,
            WidthKind::Kolmogorov => &mut self.kolmogorov,
            WidthKind::Bernstein => &mut self.bernstein,
            WidthKind::Hilbert => &mut self.hilbert,
            WidthKind::Approximation => &mut self.approximation,
        }
    }
}

/// Computes one width.
pub fn compute_width(inst: &Instance, kind: WidthKind, n: usize, cfg: &SearchConfig) -> Result<Bounds> {
    match kind {
        WidthKind::Gelfand => gelfand(inst, n, &InfoClass::AllLinear, cfg),
        WidthKind::Kolmogorov => kolmogorov(inst, n, cfg),
        WidthKind::Bernstein => bernstein(inst, n, cfg),
        WidthKind::Hilbert => hilbert(inst, n, cfg),
        WidthKind::Approximation => approximation(inst, n, cfg),
    }
}
