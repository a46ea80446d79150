//! Per-`(instance, n)` cache of the searches that several widths share.

use std::cell::OnceCell;

use nalgebra::DMatrix;

use super::{approximation, bernstein, gelfand, hilbert, kolmogorov, Bounds, Side, WidthKind};
use crate::error::Result;
use crate::numerics::linalg::{orthonormalize, svd, Svd};
use crate::numerics::search::{coordinate_frames, random_frame, rng_for, rotation_descent};
use crate::numerics::SearchConfig;
use crate::spaces::{Instance, Shape};

/// Cap on enumerated coordinate frames per candidate pool.
pub(crate) const COORDINATE_CAP: u64 = 64;

/// Cap on random frames per candidate pool.
pub(crate) const RANDOM_CAP: usize = 64;

/// A lower bound that is exact in a closed-form regime, with the matching
/// upper side when it is known too.
#[derive(Debug, Clone)]
pub(crate) struct Exact {
    pub lower: Side,
    pub upper: Option<Side>,
    /// Frame of functionals (columns) attaining the value, if known.
    pub frame: Option<DMatrix<f64>>,
}

/// An upper side together with the frame that produced it.
#[derive(Debug, Clone)]
pub(crate) struct FrameSide {
    pub side: Side,
    pub frame: Option<DMatrix<f64>>,
}

fn share<T>(cell: &OnceCell<Result<T>>, f: impl FnOnce() -> Result<T>) -> Result<&T> {
    cell.get_or_init(f).as_ref().map_err(Clone::clone)
}

pub(crate) struct Context<'a> {
    pub inst: &'a Instance,
    pub n: usize,
    pub cfg: &'a SearchConfig,
    svd: OnceCell<Svd>,
    g_exact: OnceCell<Result<Option<Exact>>>,
    g_upper: OnceCell<Result<FrameSide>>,
    b_lower: OnceCell<Result<Side>>,
    h_lower: OnceCell<Result<Side>>,
}

impl<'a> Context<'a> {
    pub fn new(inst: &'a Instance, n: usize, cfg: &'a SearchConfig) -> Self {
        Context {
            inst,
            n,
            cfg,
            svd: OnceCell::new(),
            g_exact: OnceCell::new(),
            g_upper: OnceCell::new(),
            b_lower: OnceCell::new(),
            h_lower: OnceCell::new(),
        }
    }

    pub fn svd(&self) -> &Svd {
        self.svd.get_or_init(|| svd(self.inst.matrix()))
    }

    pub fn rank(&self) -> usize {
        self.svd().rank()
    }

    pub fn d(&self) -> usize {
        self.inst.source_dim()
    }

    /// Radius of `F` when the instance is a centred Euclidean ball between
    /// Euclidean spaces, where every width equals `r σ_{n+1}(S)`.
    pub fn hilbert_radius(&self) -> Option<f64> {
        if !self.inst.is_hilbert_ball() {
            return None;
        }
        match &self.inst.prepared().ok()?.body {
            Shape::Ball { radius, .. } => Some(*radius),
            Shape::Polytope(_) => None,
        }
    }

    /// `r σ_{n+1}(S)` in the Hilbert-ball regime.
    pub fn singular_value(&self) -> Option<f64> {
        self.hilbert_radius().map(|r| r * self.svd().sigma_at(self.n))
    }

    /// First `k` right singular vectors of `S` as columns (`k ≤ d`).
    pub fn right_frame(&self, k: usize) -> DMatrix<f64> {
        self.svd().v.columns(0, k.min(self.d())).into_owned()
    }

    pub fn g_exact(&self) -> Result<Option<&Exact>> {
        share(&self.g_exact, || gelfand::exact(self)).map(Option::as_ref)
    }

    pub fn g_upper(&self) -> Result<&FrameSide> {
        share(&self.g_upper, || gelfand::upper(self))
    }

    pub fn b_lower(&self) -> Result<&Side> {
        share(&self.b_lower, || bernstein::lower(self))
    }

    pub fn h_lower(&self) -> Result<&Side> {
        share(&self.h_lower, || hilbert::lower(self))
    }

    /// Best certified lower bound on `c_n`.
    pub fn gelfand_lower(&self) -> Result<Side> {
        let mut lower = Side::zero_lower();
        if let Some(e) = self.g_exact()? {
            lower = lower.max_lower(e.lower.clone());
        }
        lower = lower.max_lower(implied(self.b_lower()?, "bernstein"));
        lower = lower.max_lower(implied(self.h_lower()?, "hilbert"));
        Ok(lower)
    }

    pub fn gelfand_bounds(&self) -> Result<Bounds> {
        Ok(Bounds::new(WidthKind::Gelfand, self.n, self.gelfand_lower()?, self.g_upper()?.side.clone()))
    }

    /// `b_n ≤ c_n`, and `b_{d−1}` is attained by the ball over all of `ℝ^d`.
    pub fn bernstein_upper(&self) -> Result<Side> {
        let mut upper = implied(&self.g_upper()?.side, "gelfand");
        if let Some(v) = self.singular_value() {
            upper = upper.min_upper(Side::closed(v, "r·σ_{n+1}(S)"));
        }
        if let Some(s) = bernstein::exact_upper(self)? {
            upper = upper.min_upper(s);
        }
        Ok(upper)
    }

    pub fn bernstein_bounds(&self) -> Result<Bounds> {
        let lower = Side::zero_lower().max_lower(self.b_lower()?.clone()).max_lower(implied(self.h_lower()?, "hilbert"));
        Ok(Bounds::new(WidthKind::Bernstein, self.n, lower, self.bernstein_upper()?))
    }

    pub fn hilbert_bounds(&self) -> Result<Bounds> {
        let mut upper = implied(&self.bernstein_upper()?, "bernstein");
        if let Some(s) = hilbert::exact_upper(self) {
            upper = upper.min_upper(s);
        }
        Ok(Bounds::new(WidthKind::Hilbert, self.n, self.h_lower()?.clone(), upper))
    }

    pub fn kolmogorov_bounds(&self) -> Result<Bounds> {
        kolmogorov::bounds(self)
    }

    pub fn approximation_bounds(&self) -> Result<Bounds> {
        approximation::bounds(self)
    }

    /// Random stream id for a given search purpose.
    pub fn stream(&self, purpose: u64) -> u64 {
        purpose * 10_000 + self.n as u64
    }

    /// Candidate `dim × k` frames: coordinate subsets and seeded random draws.
    pub fn generic_frames(&self, dim: usize, k: usize, purpose: u64) -> Vec<DMatrix<f64>> {
        let mut out = coordinate_frames(dim, k, COORDINATE_CAP).unwrap_or_default();
        let mut rng = rng_for(self.cfg.seed, self.stream(purpose));
        for _ in 0..self.cfg.restarts.min(RANDOM_CAP) {
            out.push(random_frame(dim, k, &mut rng));
        }
        out
    }
}

/// Re-tags a side as inherited through an inequality.
pub(crate) fn implied(side: &Side, from: &str) -> Side {
    let mut s = side.clone();
    if s.value.is_finite() {
        s.witness = super::Witness::Implied { from: from.into() };
    }
    s
}

/// Orthonormalized copy of `m` if its columns are independent.
pub(crate) fn full_frame(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let q = orthonormalize(m);
    (q.ncols() == m.ncols()).then_some(q)
}

/// Minimizes `eval` over the candidates, then refines the best `refine` of
/// them by frame rotations. Returns the best frame and value.
pub(crate) fn search_frames<F>(
    candidates: Vec<DMatrix<f64>>,
    mut eval: F,
    refine: usize,
    cfg: &SearchConfig,
) -> Option<(DMatrix<f64>, f64)>
where
    F: FnMut(&DMatrix<f64>) -> Option<f64>,
{
    let mut scored: Vec<(DMatrix<f64>, f64)> = candidates
        .into_iter()
        .filter_map(|c| eval(&c).filter(|v| v.is_finite()).map(|v| (c, v)))
        .collect();
    if scored.is_empty() {
        return None;
    }
    // stable sort keeps the earlier candidate on ties
    scored.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut best = scored[0].clone();
    for (frame, value) in scored.into_iter().take(refine) {
        let (f, v) = rotation_descent(frame, value, &mut eval, cfg.max_iters, cfg.tol);
        if v < best.1 {
            best = (f, v);
        }
    }
    Some(best)
}
