//! Hilbert numbers `h_n = sup σ_{n+1}(B S A)` over contractions
//! `B : Y → ℓ2` and affine embeddings `A(B_{ℓ2}) + g ⊆ F`.

use nalgebra::{DMatrix, DVector};

use super::context::{search_frames, Context};
use super::{rows_of, vec_of, Bounds, Side, Witness};
use crate::error::Result;
use crate::numerics::linalg::{singular_values, svd};
use crate::numerics::lp::{lp_solve, LpProblem, Sense};
use crate::numerics::search::coordinate_frames;
use crate::numerics::SearchConfig;
use crate::spaces::{Instance, Shape, MEMBERSHIP_TOL};
use crate::witness::{build_chain, certify_chain, compression_fits, ChainVariant, DEFAULT_EPS};

/// Coordinate frames tried per embedding dimension.
const COORDINATE_CAP: u64 = 16;

/// Random frames tried per embedding dimension.
const RANDOM_CAP: usize = 8;

pub fn hilbert(inst: &Instance, n: usize, cfg: &SearchConfig) -> Result<Bounds> {
    cfg.validate()?;
    Context::new(inst, n, cfg).hilbert_bounds()
}

pub(crate) fn exact_upper(ctx: &Context) -> Option<Side> {
    if ctx.n >= ctx.d().min(ctx.rank()) {
        return Some(Side::closed(0.0, "rank of B S A is at most rank S"));
    }
    None
}

struct Candidate {
    value: f64,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    g: DVector<f64>,
}

impl Candidate {
    fn side(self) -> Side {
        Side::new(
            self.value,
            true,
            Witness::Compression {
                a: rows_of(&self.a),
                b: rows_of(&self.b),
                shift: vec_of(&self.g),
            },
        )
    }
}

/// `σ_{n+1}(B S A)` if the pair passes the containment and contraction checks.
fn checked(inst: &Instance, n: usize, a: DMatrix<f64>, b: DMatrix<f64>, g: DVector<f64>) -> Result<Option<Candidate>> {
    if a.ncols() <= n || b.nrows() <= n {
        return Ok(None);
    }
    if inst.target_norm().into_l2_operator_norm(&b) > 1.0 + 1e-12 || !compression_fits(inst, &a, &g, MEMBERSHIP_TOL)? {
        return Ok(None);
    }
    let sigma = singular_values(&(&b * inst.matrix() * &a));
    let value = sigma.get(n).copied().unwrap_or(0.0);
    Ok(Some(Candidate { value, a, b, g }))
}

/// Largest `α` and shift `g` with `α·A0(B_{ℓ2}) + g ⊆ F`.
fn fit_scale(inst: &Instance, a0: &DMatrix<f64>) -> Result<Option<(f64, DVector<f64>)>> {
    let prep = inst.prepared()?;
    match &prep.body {
        Shape::Ball { center, radius } => {
            let top = svd(a0).sigma.first().copied().unwrap_or(0.0);
            Ok((top > 0.0).then(|| (radius / top, center.clone())))
        }
        Shape::Polytope(_) => {
            let h = prep.body_hrep(&inst.body)?;
            let d = inst.source_dim();
            let mut obj = vec![0.0; d + 1];
            obj[d] = 1.0;
            let mut lp = LpProblem::free(obj, Sense::Maximize);
            lp.set_bounds(d, Some(0.0), None);
            for i in 0..h.len() {
                let ai = h.a.row(i).transpose();
                let mut row: Vec<f64> = ai.iter().copied().collect();
                row.push((a0.transpose() * &ai).norm());
                lp.le(row, h.b[i]);
            }
            let Ok(sol) = lp_solve(&lp) else {
                return Ok(None);
            };
            let alpha = sol.value * (1.0 - 1e-12);
            Ok((alpha > 0.0).then(|| (alpha, DVector::from_vec(sol.x[..d].to_vec()))))
        }
    }
}

/// Contractions built from `S A`: its top left singular vectors, and a
/// selection of its largest rows.
fn contractions(inst: &Instance, sa: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    let k = sa.ncols();
    let m = sa.nrows();
    let t = inst.target_norm();
    let mut out = Vec::new();
    let dec = svd(sa);
    let r = k.min(m);
    out.push(dec.u.columns(0, r).transpose());
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&i, &j| sa.row(j).norm().total_cmp(&sa.row(i).norm()));
    let mut sel = DMatrix::zeros(r, m);
    for (row, &i) in idx.iter().take(r).enumerate() {
        sel[(row, i)] = 1.0;
    }
    out.push(sel);
    out.into_iter()
        .filter_map(|b| {
            let nb = t.into_l2_operator_norm(&b);
            (nb > 0.0).then(|| b / (nb * (1.0 + 1e-12)))
        })
        .collect()
}

fn consider(best: &mut Option<Candidate>, c: Option<Candidate>) {
    if let Some(c) = c {
        if best.as_ref().is_none_or(|b| c.value > b.value + 1e-13) {
            *best = Some(c);
        }
    }
}

pub(crate) fn lower(ctx: &Context) -> Result<Side> {
    let inst = ctx.inst;
    let n = ctx.n;
    let d = ctx.d();
    let top = d.min(ctx.rank());
    if n >= top {
        return Ok(Side::zero_lower());
    }
    if let Some(v) = ctx.singular_value() {
        return Ok(Side::closed(v, "r·σ_{n+1}(S)"));
    }
    let mut best: Option<Candidate> = None;
    for variant in ChainVariant::admissible_for(inst)? {
        let Ok(chain) = build_chain(inst, top, variant, DEFAULT_EPS, ctx.cfg) else {
            continue;
        };
        for len in n + 1..=chain.len() {
            let pre = chain.prefix(inst, len)?;
            let cert = certify_chain(&pre, inst)?;
            if cert.containment_ok && cert.contraction_ok {
                let value = cert.sigma.get(n).copied().unwrap_or(0.0);
                consider(&mut best, Some(Candidate {
                    value,
                    a: pre.a,
                    b: pre.b,
                    g: pre.shift,
                }));
            }
        }
    }
    let s = inst.matrix();
    for k in n + 1..=top {
        let mut frames = vec![ctx.right_frame(k)];
        frames.extend(coordinate_frames(d, k, COORDINATE_CAP).unwrap_or_default());
        let mut rng = crate::numerics::search::rng_for(ctx.cfg.seed, ctx.stream(3) + 100 * k as u64);
        for _ in 0..ctx.cfg.restarts.min(RANDOM_CAP) {
            frames.push(crate::numerics::search::random_frame(d, k, &mut rng));
        }
        for a0 in frames {
            let Some((alpha, g)) = fit_scale(inst, &a0)? else {
                continue;
            };
            let a = a0 * alpha;
            let sa = s * &a;
            for b in contractions(inst, &sa) {
                consider(&mut best, checked(inst, n, a.clone(), b, g.clone())?);
            }
        }
    }
    // local refinement of the embedding direction for the best dimension
    if let Some(a_best) = best.as_ref().map(|b| b.a.clone()) {
        let k = a_best.ncols();
        if k < d {
            let start = crate::numerics::linalg::orthonormalize(&a_best);
            if start.ncols() == k {
                let eval = |a0: &DMatrix<f64>| -> Option<f64> {
                    let (alpha, g) = fit_scale(inst, a0).ok()??;
                    let a = a0 * alpha;
                    let sa = s * &a;
                    contractions(inst, &sa)
                        .into_iter()
                        .filter_map(|b| checked(inst, n, a.clone(), b, g.clone()).ok().flatten())
                        .map(|c| -c.value)
                        .reduce(f64::min)
                };
                let budget = SearchConfig {
                    max_iters: ctx.cfg.max_iters / 4,
                    ..*ctx.cfg
                };
                if let Some((frame, _)) = search_frames(vec![start], eval, 1, &budget) {
                    if let Some((alpha, g)) = fit_scale(inst, &frame)? {
                        let a = frame * alpha;
                        let sa = s * &a;
                        for b in contractions(inst, &sa) {
                            consider(&mut best, checked(inst, n, a.clone(), b, g.clone())?);
                        }
                    }
                }
            }
        }
    }
    Ok(best.map(Candidate::side).unwrap_or_else(Side::zero_lower))
}
