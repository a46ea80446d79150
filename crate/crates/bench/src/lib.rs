//! Fixtures shared by the solver benchmarks.

use nalgebra::DMatrix;
use nwidths::numerics::lp::{LpProblem, Sense};
use nwidths::numerics::search::{gaussian_matrix, rng_for};
use nwidths::{ConvexBody, Instance, NormTag, Subspace};

/// `max cᵀx` over `x ≥ 0` with `rows` random packing constraints.
pub fn packing_lp(vars: usize, rows: usize, seed: u64) -> LpProblem {
    let mut rng = rng_for(seed, 0);
    let a = gaussian_matrix(rows, vars, &mut rng).map(|v| v.abs() + 0.1);
    let c = gaussian_matrix(1, vars, &mut rng).map(|v| v.abs());
    let mut p = LpProblem::new(c.iter().copied().collect(), Sense::Maximize);
    for r in a.row_iter() {
        p.le(r.iter().copied().collect(), 1.0);
    }
    p
}

/// Identity from `ℓ1^d` into `ℓ∞^d` on the unit cross-polytope.
pub fn cross_polytope(d: usize) -> Instance {
    Instance::from_parts(
        DMatrix::identity(d, d),
        NormTag::L1,
        NormTag::Linf,
        ConvexBody::lp_ball(NormTag::L1, 1.0, d),
    )
    .expect("valid instance")
}

/// Seeded operator on the `ℓ2` unit ball.
pub fn euclidean(d: usize, seed: u64) -> Instance {
    let mut rng = rng_for(seed, 1);
    let m = gaussian_matrix(d, d, &mut rng);
    Instance::from_parts(m, NormTag::L2, NormTag::L2, ConvexBody::lp_ball(NormTag::L2, 1.0, d)).expect("valid instance")
}

/// Kernel of the first `k` coordinate functionals.
pub fn coordinate_kernel(d: usize, k: usize) -> Subspace {
    Subspace::kernel_of_rows(&DMatrix::identity(d, d).rows(0, k).into_owned(), d)
}
