//! Kolmogorov numbers `d_n = inf_{dim M ≤ n} sup_{f ∈ F} dist(S f, M)`.

use nalgebra::{DMatrix, DVector};

use super::context::{implied, search_frames, Context};
use super::{rows_of, vec_of, Bounds, Side, WidthKind, Witness};
use crate::error::{Error, Result};
use crate::numerics::chebyshev::point_set_center;
use crate::numerics::linalg::{orthonormalize, spectral_norm, svd};
use crate::numerics::lp::{lp_solve, LpProblem, Sense};
use crate::numerics::polytope::{section_vertices, DEFAULT_BUDGET};
use crate::numerics::SearchConfig;
use crate::spaces::{norm_eval, Instance, NormTag, Shape};

const REFINE: usize = 2;

/// Largest target dimension for the sign-vector enumeration of the `ℓ∞` unit ball.
const MAX_SIGN_ROWS: usize = 12;

pub fn kolmogorov(inst: &Instance, n: usize, cfg: &SearchConfig) -> Result<Bounds> {
    cfg.validate()?;
    Context::new(inst, n, cfg).kolmogorov_bounds()
}

/// `t`-distance from `y` to the column span of `q` (orthonormal columns).
fn distance(y: &DVector<f64>, q: &DMatrix<f64>, t: NormTag) -> Result<f64> {
    let k = q.ncols();
    if k == 0 {
        return Ok(norm_eval(y, t));
    }
    match t {
        NormTag::L2 => Ok((y - q * (q.transpose() * y)).norm()),
        NormTag::Linf => {
            let m = y.len();
            let mut obj = vec![0.0; k + 1];
            obj[k] = 1.0;
            let mut lp = LpProblem::free(obj, Sense::Minimize);
            lp.set_bounds(k, Some(0.0), None);
            for i in 0..m {
                let mut up: Vec<f64> = q.row(i).iter().copied().collect();
                up.push(1.0);
                lp.ge(up, y[i]);
                let mut dn: Vec<f64> = q.row(i).iter().map(|x| -x).collect();
                dn.push(1.0);
                lp.ge(dn, -y[i]);
            }
            Ok(lp_solve(&lp)?.value)
        }
        NormTag::L1 => {
            let m = y.len();
            let nv = k + m;
            let mut obj = vec![0.0; nv];
            for o in obj.iter_mut().skip(k) {
                *o = 1.0;
            }
            let mut lp = LpProblem::free(obj, Sense::Minimize);
            for i in 0..m {
                lp.set_bounds(k + i, Some(0.0), None);
                let mut up = vec![0.0; nv];
                let mut dn = vec![0.0; nv];
                for j in 0..k {
                    up[j] = q[(i, j)];
                    dn[j] = -q[(i, j)];
                }
                up[k + i] = 1.0;
                dn[k + i] = 1.0;
                lp.ge(up, y[i]);
                lp.ge(dn, -y[i]);
            }
            Ok(lp_solve(&lp)?.value)
        }
    }
}

/// `sup_{f ∈ F} dist(S f, span(basis))` for a `m × n` basis.
///
/// The flag is `true` when the value is the exact supremum; otherwise it is
/// an upper bound (shifted Euclidean ball with a Euclidean target).
pub fn kolmogorov_distance(inst: &Instance, basis: &DMatrix<f64>) -> Result<(f64, bool)> {
    let m = inst.target_dim();
    if basis.nrows() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: basis.nrows(),
        });
    }
    let q = if basis.ncols() == 0 { basis.clone() } else { orthonormalize(basis) };
    let s = inst.matrix();
    let t = inst.target_norm();
    let prep = inst.prepared()?;
    match &prep.body {
        Shape::Polytope(verts) => {
            let mut worst: f64 = 0.0;
            for v in verts {
                worst = worst.max(distance(&(s * v), &q, t)?);
            }
            Ok((worst, true))
        }
        Shape::Ball { center, radius } => ball_sup(s, center, *radius, &q, t),
    }
}

/// `sup_{‖x − center‖₂ ≤ radius} dist(S x, span(q))` for orthonormal `q`.
fn ball_sup(s: &DMatrix<f64>, center: &DVector<f64>, radius: f64, q: &DMatrix<f64>, t: NormTag) -> Result<(f64, bool)> {
    let m = s.nrows();
    match t {
        NormTag::L2 => {
            let proj = DMatrix::identity(m, m) - q * q.transpose();
            let off = (&proj * s * center).norm();
            let spread = radius * spectral_norm(&(&proj * s));
            Ok((off + spread, off <= 1e-12 * (1.0 + spread)))
        }
        _ => {
            // sup over λ in the dual unit ball ∩ M⊥ of λ·S c + r ‖Sᵀ λ‖₂
            let dual_vertices: Vec<DVector<f64>> = match t {
                NormTag::Linf => (0..m)
                    .flat_map(|i| {
                        let e = DVector::from_fn(m, |j, _| if i == j { 1.0 } else { 0.0 });
                        [e.clone(), -e]
                    })
                    .collect(),
                _ => {
                    if m > MAX_SIGN_ROWS {
                        return Err(Error::Unsupported(format!("sign enumeration over {m} rows")));
                    }
                    (0..1u64 << m)
                        .map(|mask| DVector::from_fn(m, |i, _| if (mask >> i) & 1 == 1 { -1.0 } else { 1.0 }))
                        .collect()
                }
            };
            let lambdas: Vec<DVector<f64>> = if q.ncols() == 0 {
                dual_vertices
            } else {
                section_vertices(&dual_vertices, &q.transpose(), &DVector::zeros(q.ncols()), DEFAULT_BUDGET)?
                    .into_iter()
                    .map(|sv| sv.point)
                    .collect()
            };
            let sc = s * center;
            let value = lambdas
                .iter()
                .map(|l| l.dot(&sc) + radius * (s.transpose() * l).norm())
                .fold(0.0, f64::max);
            Ok((value, true))
        }
    }
}

/// `inf_y sup_{f ∈ F} dist(S f − y, span(basis))` and the shift `y` attaining it.
///
/// The flag is `true` when the value is the exact infimum over shifts;
/// otherwise it is the exact value at the returned shift.
pub fn shifted_kolmogorov_distance(inst: &Instance, basis: &DMatrix<f64>) -> Result<(f64, bool, DVector<f64>)> {
    let m = inst.target_dim();
    if basis.nrows() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: basis.nrows(),
        });
    }
    let q = if basis.ncols() == 0 { basis.clone() } else { orthonormalize(basis) };
    let s = inst.matrix();
    let t = inst.target_norm();
    let prep = inst.prepared()?;
    match &prep.body {
        Shape::Ball { center, radius } => {
            let (v, _) = ball_sup(s, &DVector::zeros(center.len()), *radius, &q, t)?;
            Ok((v, true, s * center))
        }
        Shape::Polytope(verts) => {
            let images: Vec<DVector<f64>> = verts.iter().map(|v| s * v).collect();
            match t {
                NormTag::L2 => {
                    let proj = DMatrix::identity(m, m) - &q * q.transpose();
                    let pts: Vec<DVector<f64>> = images.iter().map(|y| &proj * y).collect();
                    let c = point_set_center(&pts, NormTag::L2)?;
                    Ok((c.radius, c.certified, c.center))
                }
                _ => shifted_lp(&images, &q, t),
            }
        }
    }
}

/// Joint LP over the shift `y`, one coefficient vector per point and the level.
fn shifted_lp(images: &[DVector<f64>], q: &DMatrix<f64>, t: NormTag) -> Result<(f64, bool, DVector<f64>)> {
    let m = q.nrows();
    let k = q.ncols();
    let np = images.len();
    let nc = np * k;
    let nu = if t == NormTag::L1 { np * m } else { 0 };
    let nv = m + nc + nu + 1;
    let level = nv - 1;
    let mut obj = vec![0.0; nv];
    obj[level] = 1.0;
    let mut lp = LpProblem::free(obj, Sense::Minimize);
    for j in m + nc..nv {
        lp.set_bounds(j, Some(0.0), None);
    }
    for (p, y) in images.iter().enumerate() {
        let mut sum = vec![0.0; nv];
        sum[level] = -1.0;
        for i in 0..m {
            let mut up = vec![0.0; nv];
            up[i] = 1.0;
            for j in 0..k {
                up[m + p * k + j] = q[(i, j)];
            }
            let mut dn: Vec<f64> = up.iter().map(|x| -x).collect();
            let slack = if t == NormTag::L1 {
                let u = m + nc + p * m + i;
                sum[u] = 1.0;
                u
            } else {
                level
            };
            up[slack] = 1.0;
            dn[slack] = 1.0;
            lp.ge(up, y[i]);
            lp.ge(dn, -y[i]);
        }
        if t == NormTag::L1 {
            lp.le(sum, 0.0);
        }
    }
    let sol = lp_solve(&lp)?;
    let shift = DVector::from_fn(m, |i, _| sol.x[i]);
    // exact evaluation at the returned shift
    let mut value: f64 = 0.0;
    for y in images {
        value = value.max(distance(&(y - &shift), q, t)?);
    }
    Ok((value, true, shift))
}

fn subspace_witness(q: &DMatrix<f64>) -> Witness {
    Witness::Subspace { basis: rows_of(q) }
}

/// The first `k` left singular vectors of `S`, padded to `k` columns.
fn left_frame(ctx: &Context, k: usize) -> DMatrix<f64> {
    let m = ctx.inst.target_dim();
    let u = &ctx.svd().u;
    let have = u.ncols().min(k);
    let mut cols: Vec<DVector<f64>> = (0..have).map(|j| u.column(j).into_owned()).collect();
    let mut e = 0;
    while cols.len() < k.min(m) && e < m {
        cols.push(DVector::from_fn(m, |i, _| if i == e { 1.0 } else { 0.0 }));
        let q = orthonormalize(&DMatrix::from_columns(&cols));
        if q.ncols() < cols.len() {
            cols.pop();
        } else {
            cols = q.column_iter().map(|c| c.into_owned()).collect();
        }
        e += 1;
    }
    if cols.is_empty() {
        DMatrix::zeros(m, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

fn lower(ctx: &Context) -> Result<Side> {
    let inst = ctx.inst;
    let mut lower = Side::zero_lower().max_lower(implied(ctx.b_lower()?, "bernstein"));
    if inst.target_norm() == NormTag::L2 {
        lower = lower.max_lower(implied(&ctx.gelfand_lower()?, "gelfand"));
    }
    if ctx.n == 0 {
        // any f ∈ F gives ‖S f‖ ≤ d_0
        let s = inst.matrix();
        let prep = inst.prepared()?;
        let points: Vec<DVector<f64>> = match &prep.body {
            Shape::Polytope(v) => v.clone(),
            Shape::Ball { center, radius } => {
                let v = svd(s).v.column(0).into_owned();
                vec![center + &v * *radius, center - &v * *radius, center.clone()]
            }
        };
        let best = points
            .iter()
            .map(|f| norm_eval(&(s * f), inst.target_norm()))
            .fold(0.0, f64::max);
        lower = lower.max_lower(Side::new(best, true, Witness::ClosedForm { note: "norm of S f at a point of F".into() }));
    }
    Ok(lower)
}

fn upper(ctx: &Context) -> Result<Side> {
    let inst = ctx.inst;
    let n = ctx.n;
    let m = inst.target_dim();
    if n >= ctx.rank() || n >= m {
        let q = left_frame(ctx, n.min(m));
        return Ok(Side::new(0.0, true, subspace_witness(&q)));
    }
    if let Some(v) = ctx.singular_value() {
        return Ok(Side::new(v, true, subspace_witness(&left_frame(ctx, n))));
    }
    if n == 0 {
        let q = DMatrix::zeros(m, 0);
        let (v, _) = kolmogorov_distance(inst, &q)?;
        return Ok(Side::new(v, true, subspace_witness(&q)));
    }
    let mut candidates = vec![left_frame(ctx, n)];
    let prep = inst.prepared()?;
    if let Shape::Polytope(verts) = &prep.body {
        let images = DMatrix::from_columns(&verts.iter().map(|v| inst.matrix() * v).collect::<Vec<_>>());
        let dec = svd(&images);
        if dec.rank() >= n {
            candidates.push(dec.u.columns(0, n).into_owned());
        }
    }
    candidates.extend(ctx.generic_frames(m, n, 4));
    let eval = |q: &DMatrix<f64>| kolmogorov_distance(inst, q).ok().map(|r| r.0);
    let Some((q, value)) = search_frames(candidates, eval, REFINE, ctx.cfg) else {
        return Ok(Side::unbounded());
    };
    Ok(Side::new(value, true, subspace_witness(&q)))
}

pub(crate) fn bounds(ctx: &Context) -> Result<Bounds> {
    let lower = match ctx.singular_value() {
        Some(v) => Side::closed(v, "r·σ_{n+1}(S)"),
        None => lower(ctx)?,
    };
    Ok(Bounds::new(WidthKind::Kolmogorov, ctx.n, lower, upper(ctx)?))
}

/// Kolmogorov width over affine subspaces `y + M`. It agrees with the linear
/// width when `F = −F` and is invariant under translations of `F`.
pub fn shifted_kolmogorov(inst: &Instance, n: usize, cfg: &SearchConfig) -> Result<Bounds> {
    cfg.validate()?;
    let ctx = Context::new(inst, n, cfg);
    if inst.is_origin_symmetric()? {
        return bounds(&ctx);
    }
    Ok(Bounds::new(WidthKind::Kolmogorov, n, shifted_lower(&ctx)?, shifted_upper(&ctx)?))
}

fn shifted_witness(q: &DMatrix<f64>, shift: &DVector<f64>) -> Witness {
    Witness::ShiftedSubspace {
        basis: rows_of(q),
        shift: vec_of(shift),
    }
}

fn shifted_lower(ctx: &Context) -> Result<Side> {
    let inst = ctx.inst;
    let mut lower = Side::zero_lower().max_lower(implied(ctx.b_lower()?, "bernstein"));
    if inst.target_norm() == NormTag::L2 {
        lower = lower.max_lower(implied(&ctx.gelfand_lower()?, "gelfand"));
    }
    if ctx.n == 0 {
        // half the diameter of S(F)
        let s = inst.matrix();
        let t = inst.target_norm();
        let prep = inst.prepared()?;
        let half = match &prep.body {
            Shape::Ball { radius, .. } => radius * t.from_l2_operator_norm(s),
            Shape::Polytope(v) => {
                let images: Vec<DVector<f64>> = v.iter().map(|x| s * x).collect();
                let mut best: f64 = 0.0;
                for (i, a) in images.iter().enumerate() {
                    for b in &images[i + 1..] {
                        best = best.max(norm_eval(&(a - b), t) / 2.0);
                    }
                }
                best
            }
        };
        lower = lower.max_lower(Side::new(half, true, Witness::ClosedForm { note: "half the diameter of S(F)".into() }));
    }
    Ok(lower)
}

fn shifted_upper(ctx: &Context) -> Result<Side> {
    let inst = ctx.inst;
    let n = ctx.n;
    let m = inst.target_dim();
    if n >= ctx.rank() || n >= m {
        let q = left_frame(ctx, n.min(m));
        return Ok(Side::new(0.0, true, shifted_witness(&q, &DVector::zeros(m))));
    }
    let prep = inst.prepared()?;
    let mut candidates = vec![left_frame(ctx, n)];
    if let Shape::Polytope(verts) = &prep.body {
        let images: Vec<DVector<f64>> = verts.iter().map(|v| inst.matrix() * v).collect();
        let mean = images.iter().fold(DVector::zeros(m), |a, y| a + y) / images.len() as f64;
        let centred = DMatrix::from_columns(&images.iter().map(|y| y - &mean).collect::<Vec<_>>());
        let dec = svd(&centred);
        if n > 0 && dec.rank() >= n {
            candidates.push(dec.u.columns(0, n).into_owned());
        }
    }
    if n > 0 {
        candidates.extend(ctx.generic_frames(m, n, 6));
    }
    let eval = |q: &DMatrix<f64>| shifted_kolmogorov_distance(inst, q).ok().map(|r| r.0);
    let Some((q, _)) = search_frames(candidates, eval, REFINE, ctx.cfg) else {
        return Ok(Side::unbounded());
    };
    let (value, _, shift) = shifted_kolmogorov_distance(inst, &q)?;
    Ok(Side::new(value, true, shifted_witness(&orthonormalize_or_empty(&q), &shift)))
}

fn orthonormalize_or_empty(q: &DMatrix<f64>) -> DMatrix<f64> {
    if q.ncols() == 0 {
        q.clone()
    } else {
        orthonormalize(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::ConvexBody;

    #[test]
    fn ball_in_linf_matches_polytope_of_the_same_ball() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, -0.2, 0.7]);
        let ball = Instance::from_parts(s.clone(), NormTag::L2, NormTag::Linf, ConvexBody::lp_ball(NormTag::L2, 1.0, 2)).unwrap();
        let q = DMatrix::from_column_slice(2, 1, &[0.6, 0.8]);
        let (v, exact) = kolmogorov_distance(&ball, &q).unwrap();
        assert!(exact);
        // oracle: dense sampling of the circle
        let mut best: f64 = 0.0;
        for k in 0..20_000 {
            let th = k as f64 / 20_000.0 * std::f64::consts::TAU;
            let y = &s * DVector::from_vec(vec![th.cos(), th.sin()]);
            best = best.max(distance(&y, &q, NormTag::Linf).unwrap());
        }
        assert!((v - best).abs() < 1e-6, "{v} vs {best}");
    }
}
