//! Bernstein numbers: the largest `‖S·‖`-ball of an `(n+1)`-dimensional
//! subspace that fits in a translate inside `F`.

use nalgebra::DMatrix;

use super::context::{full_frame, search_frames, Context};
use super::{rows_of, vec_of, Bounds, Side, Witness};
use crate::error::Result;
use crate::numerics::{inscribed_ball, InscribedBall, SearchConfig};
use crate::spaces::{Instance, Subspace};
use crate::witness::{build_chain, ChainVariant, DEFAULT_EPS};

const REFINE: usize = 2;

pub fn bernstein(inst: &Instance, n: usize, cfg: &SearchConfig) -> Result<Bounds> {
    cfg.validate()?;
    Context::new(inst, n, cfg).bernstein_bounds()
}

fn ball_of(inst: &Instance, frame: &DMatrix<f64>, cfg: &SearchConfig) -> Option<InscribedBall> {
    inscribed_ball(inst, None, &Subspace::span(frame), cfg).ok()
}

fn ball_witness(b: &InscribedBall) -> Witness {
    Witness::Ball {
        center: vec_of(&b.center),
        radius: b.radius,
        basis: rows_of(&b.basis),
    }
}

/// `b_{d−1}`: the only `d`-dimensional subspace is `ℝ^d` itself.
pub(crate) fn exact_upper(ctx: &Context) -> Result<Option<Side>> {
    let k = ctx.n + 1;
    if k > ctx.d() || k > ctx.rank() {
        return Ok(Some(Side::closed(0.0, "S is not injective on any subspace of this dimension")));
    }
    if k == ctx.d() {
        let b = ctx.b_lower()?;
        return Ok(Some(Side::new(b.value, b.certified, Witness::Implied { from: "ball over all of R^d".into() })));
    }
    Ok(None)
}

pub(crate) fn lower(ctx: &Context) -> Result<Side> {
    let inst = ctx.inst;
    let k = ctx.n + 1;
    let d = ctx.d();
    if k > d || k > ctx.rank() {
        return Ok(Side::zero_lower());
    }
    if let Some(v) = ctx.singular_value() {
        return Ok(Side::closed(v, "r·σ_{n+1}(S)"));
    }
    let mut candidates = vec![ctx.right_frame(k)];
    if k < d {
        if let Ok(chain) = build_chain(inst, k, ChainVariant::General, DEFAULT_EPS, ctx.cfg) {
            if chain.len() == k {
                let ps = DMatrix::from_fn(d, k, |i, j| chain.steps[j].p[i]);
                if let Some(f) = full_frame(&ps) {
                    candidates.push(f);
                }
            }
        }
        candidates.extend(ctx.generic_frames(d, k, 2));
    }
    let eval = |f: &DMatrix<f64>| ball_of(inst, f, ctx.cfg).map(|b| -b.radius);
    let refine = if k < d { REFINE } else { 0 };
    let Some((frame, _)) = search_frames(candidates, eval, refine, ctx.cfg) else {
        return Ok(Side::zero_lower());
    };
    Ok(match ball_of(inst, &frame, ctx.cfg) {
        Some(b) => Side::new(b.radius, b.certified, ball_witness(&b)),
        None => Side::zero_lower(),
    })
}
