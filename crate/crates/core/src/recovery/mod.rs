//! Optimal recovery from non-adaptive linear information, and the Monte
//! Carlo sphere bound behind the randomized lower bound.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::chebyshev::{chebyshev_center, ChebyshevCenter};
use crate::numerics::search::{gaussian_matrix, rng_for};
use crate::numerics::{max_seminorm_on_section, SearchConfig};
use crate::spaces::{Functional, Instance, NormTag, Shape, Subspace};
use crate::widths::{Context, InfoClass};

/// Samples drawn from one random stream.
const CHUNK: usize = 4096;

/// Non-adaptive information `N = (L_1, …, L_n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InformationMap {
    pub functionals: Vec<Functional>,
    #[serde(skip)]
    pub admissible: InfoClass,
}

impl InformationMap {
    pub fn new(functionals: Vec<Functional>, admissible: InfoClass) -> Result<Self> {
        admissible.validate()?;
        if let Some(first) = functionals.first() {
            let d = first.dim();
            if let Some(bad) = functionals.iter().find(|f| f.dim() != d) {
                return Err(Error::DimensionMismatch { expected: d, found: bad.dim() });
            }
        }
        if let Some(bad) = functionals.iter().position(|f| !admissible.contains(f)) {
            return Err(Error::Parse(format!("functional {bad} is not in the admissible class")));
        }
        Ok(Self { functionals, admissible })
    }

    /// Information from arbitrary linear functionals.
    pub fn linear(functionals: Vec<Functional>) -> Result<Self> {
        Self::new(functionals, InfoClass::AllLinear)
    }

    pub fn len(&self) -> usize {
        self.functionals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functionals.is_empty()
    }

    /// The `n × d` matrix whose rows are the functionals.
    pub fn matrix(&self, d: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.len(), d, |i, j| self.functionals[i].coefficients[j])
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.functionals.iter().map(|f| f.apply(x)))
    }

    fn check(&self, inst: &Instance) -> Result<()> {
        let d = inst.source_dim();
        match self.functionals.iter().find(|f| f.dim() != d) {
            Some(f) => Err(Error::DimensionMismatch { expected: d, found: f.dim() }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    /// Error of the Chebyshev-centre algorithm.
    pub worst_case_error: f64,
    pub radius_of_information: f64,
    /// Inputs with equal information and `½‖S f − S g‖` equal to the
    /// largest half-diameter of a consistent image.
    #[serde(with = "crate::serde_util::dvec_list")]
    pub witnesses: Vec<DVector<f64>>,
    /// `½‖S f − S g‖` for the witness pair.
    pub witness_half_distance: f64,
    /// `true` when the radius is the exact supremum over observations; this
    /// holds for `ℓ∞` targets and Euclidean-ball bodies.
    pub certified: bool,
    pub information: InformationMap,
}

/// Chebyshev centre of `S({f ∈ F : N f = y})`.
pub fn optimal_recovery(inst: &Instance, info: &InformationMap, y: &DVector<f64>) -> Result<DVector<f64>> {
    info.check(inst)?;
    Ok(chebyshev_center(inst, &info.functionals, y)?.center)
}

/// Worst-case error of the optimal algorithm for `info`.
///
/// For `ℓ∞` targets and Euclidean-ball bodies the Chebyshev radius of every
/// consistent image equals its half-diameter, so the radius of information is
/// the section supremum. Otherwise the radius is maximized over the
/// observations of the polytope vertices and of the witness pair, which gives
/// a lower estimate flagged as uncertified.
pub fn worst_case_error(inst: &Instance, info: &InformationMap, cfg: &SearchConfig) -> Result<RecoveryReport> {
    info.check(inst)?;
    let d = inst.source_dim();
    let n = info.matrix(d);
    let sub = if info.is_empty() { Subspace::full(d) } else { Subspace::kernel_of_rows(&n, d) };
    let sm = max_seminorm_on_section(inst, &sub, cfg)?;
    let prep = inst.prepared()?;
    let exact_regime = inst.target_norm() == NormTag::Linf || matches!(prep.body, Shape::Ball { .. });
    let (radius, certified) = if exact_regime {
        (sm.value, sm.certified)
    } else {
        let mut ys = vec![info.apply(&sm.f), info.apply(&sm.g)];
        if let Shape::Polytope(verts) = &prep.body {
            ys.extend(verts.iter().map(|v| info.apply(v)));
        }
        let mut best = sm.value;
        for y in ys {
            match chebyshev_center(inst, &info.functionals, &y) {
                Ok(ChebyshevCenter { radius, .. }) => best = best.max(radius),
                Err(Error::Inconsistent) => {}
                Err(e) => return Err(e),
            }
        }
        (best, false)
    };
    Ok(RecoveryReport {
        worst_case_error: radius,
        radius_of_information: radius,
        witnesses: vec![sm.f, sm.g],
        witness_half_distance: sm.value,
        certified,
        information: info.clone(),
    })
}

/// Recovery from the best Gelfand functionals found for `n`.
pub fn best_recovery(inst: &Instance, n: usize, cfg: &SearchConfig) -> Result<RecoveryReport> {
    cfg.validate()?;
    let ctx = Context::new(inst, n, cfg);
    let dual = inst.op.source_norm.dual();
    let d = inst.source_dim();
    let frame = ctx
        .g_upper()?
        .frame
        .clone()
        .unwrap_or_else(|| ctx.right_frame(n));
    let functionals = (0..frame.ncols())
        .map(|j| Functional::new(frame.column(j).into_owned(), dual))
        .filter(|f| f.dim() == d)
        .collect();
    worst_case_error(inst, &InformationMap::linear(functionals)?, cfg)
}

/// Monte Carlo estimate of the sphere averages behind the randomized lower bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    /// Mean of `Σ_{i>n} f_i²` over uniform `f` on the sphere of `ℝ^{2n}`.
    pub coord_second_moment: f64,
    /// Mean of `√(1 − Σ_{i≤n} f_i²)`, the radius of the consistent slice.
    pub mean_error_lb: f64,
    /// Larger of the two standard errors.
    pub stderr: f64,
}

/// Uniform points on the unit sphere of `ℝ^{2n}` observed through the first
/// `n` coordinates.
pub fn sphere_mc_lower_bound(n: usize, samples: usize, seed: u64) -> Result<McEstimate> {
    sphere_mc(n, samples, seed, None)
}

/// As [`sphere_mc_lower_bound`], with the information taken as the first
/// `n` coordinates of `rotation · f` for an orthogonal `2n × 2n` matrix.
pub fn sphere_mc_rotated(n: usize, samples: usize, seed: u64, rotation: &DMatrix<f64>) -> Result<McEstimate> {
    if rotation.nrows() != 2 * n || rotation.ncols() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            found: rotation.nrows(),
        });
    }
    let defect = (rotation.transpose() * rotation - DMatrix::identity(2 * n, 2 * n)).amax();
    if defect > 1e-9 {
        return Err(Error::InvalidOperator(format!("rotation is not orthogonal (defect {defect:.2e})")));
    }
    sphere_mc(n, samples, seed, Some(rotation))
}

fn sphere_mc(n: usize, samples: usize, seed: u64, rotation: Option<&DMatrix<f64>>) -> Result<McEstimate> {
    if n == 0 || samples == 0 {
        return Err(Error::Parse("n and samples must be at least 1".into()));
    }
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<[f64; 4]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(samples - c * CHUNK);
            let mut rng = rng_for(seed, c as u64);
            let g = gaussian_matrix(2 * n, count, &mut rng);
            let mut acc = [0.0; 4];
            for col in g.column_iter() {
                let mut f = col / col.norm();
                if let Some(r) = rotation {
                    f = r * f;
                }
                let observed: f64 = f.rows(0, n).norm_squared();
                let q = (1.0 - observed).max(0.0);
                let r = q.sqrt();
                acc[0] += q;
                acc[1] += q * q;
                acc[2] += r;
                acc[3] += r * r;
            }
            acc
        })
        .collect();
    let total = partial.iter().fold([0.0; 4], |mut a, p| {
        for i in 0..4 {
            a[i] += p[i];
        }
        a
    });
    let k = samples as f64;
    let mean_q = total[0] / k;
    let mean_r = total[2] / k;
    let se = |sum: f64, sum_sq: f64| {
        if samples < 2 {
            return 0.0;
        }
        let mean = sum / k;
        ((sum_sq / k - mean * mean).max(0.0) * k / (k - 1.0) / k).sqrt()
    };
    Ok(McEstimate {
        n,
        samples,
        seed,
        coord_second_moment: mean_q,
        mean_error_lb: mean_r,
        stderr: se(total[0], total[1]).max(se(total[2], total[3])),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::ConvexBody;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_vec(xs.to_vec())
    }

    #[test]
    fn square_with_one_coordinate() {
        let square = ConvexBody::vpolytope(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[1.0, 1.0])]);
        let inst = Instance::from_parts(DMatrix::identity(2, 2), NormTag::Linf, NormTag::Linf, square).unwrap();
        let info = InformationMap::linear(vec![Functional::dirac(0, 2, NormTag::L1)]).unwrap();
        let est = optimal_recovery(&inst, &info, &v(&[0.3])).unwrap();
        assert!((est - v(&[0.3, 0.5])).amax() < 1e-9);
        let rep = worst_case_error(&inst, &info, &SearchConfig::default()).unwrap();
        assert!((rep.worst_case_error - 0.5).abs() < 1e-9 && rep.certified);
        let (f, g) = (&rep.witnesses[0], &rep.witnesses[1]);
        assert!((f[0] - g[0]).abs() < 1e-9 && ((f[1] - g[1]).abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn information_outside_class_is_rejected() {
        let class = InfoClass::standard(2, NormTag::L1);
        let l = Functional::new(v(&[1.0, 1.0]), NormTag::L1);
        assert!(InformationMap::new(vec![l], class).is_err());
    }

    #[test]
    fn single_sample_is_reproducible() {
        let a = sphere_mc_lower_bound(1, 1, 9).unwrap();
        let b = sphere_mc_lower_bound(1, 1, 9).unwrap();
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a.coord_second_moment));
    }
}
