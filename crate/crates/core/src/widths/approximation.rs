//! Approximation numbers: the best uniform error of an affine map of rank
//! at most `n` on `F`.

use nalgebra::{DMatrix, DVector};

use super::context::{implied, search_frames, Context};
use super::{rows_of, vec_of, Bounds, Side, WidthKind, Witness};
use crate::error::{Error, Result};
use crate::numerics::chebyshev::point_set_center;
use crate::numerics::linalg::pseudo_inverse;
use crate::numerics::lp::{lp_solve, LpProblem, Sense};
use crate::numerics::SearchConfig;
use crate::spaces::{norm_eval, Instance, NormTag, Shape};

/// Iterations of the reweighted least-squares minimax fit.
const LAWSON_ITERS: usize = 400;

/// Random frames tried on top of the structured candidates.
const RANDOM_CAP: usize = 16;

/// `Φ(f) = offset + coefficients · (functionals · f)` and its exact error on `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFit {
    pub error: f64,
    pub functionals: DMatrix<f64>,
    pub coefficients: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl AffineFit {
    fn witness(&self) -> Witness {
        Witness::AffineMap {
            functionals: rows_of(&self.functionals),
            coefficients: rows_of(&self.coefficients),
            offset: vec_of(&self.offset),
        }
    }
}

pub fn approximation(inst: &Instance, n: usize, cfg: &SearchConfig) -> Result<Bounds> {
    cfg.validate()?;
    Context::new(inst, n, cfg).approximation_bounds()
}

/// Best affine map factoring through `functionals` (`k × d`), with its
/// uniform error on `F` evaluated exactly.
pub fn affine_error(inst: &Instance, functionals: &DMatrix<f64>) -> Result<AffineFit> {
    let d = inst.source_dim();
    if functionals.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: functionals.ncols(),
        });
    }
    let s = inst.matrix();
    let t = inst.target_norm();
    let k = functionals.nrows();
    let m = inst.target_dim();
    let prep = inst.prepared()?;
    let (coefficients, offset) = match &prep.body {
        Shape::Ball { center, .. } => {
            let pinv = pseudo_inverse(functionals, 1e-12);
            let c = s * pinv;
            let c0 = s * center - &c * functionals * center;
            (c, c0)
        }
        Shape::Polytope(verts) => {
            let z: Vec<DVector<f64>> = verts.iter().map(|v| functionals * v).collect();
            let y: Vec<DVector<f64>> = verts.iter().map(|v| s * v).collect();
            match t {
                NormTag::Linf => fit_linf(&z, &y, k, m)?,
                NormTag::L1 => fit_l1(&z, &y, k, m)?,
                NormTag::L2 if k == 0 => (DMatrix::zeros(m, 0), point_set_center(&y, NormTag::L2)?.center),
                NormTag::L2 => fit_l2(&z, &y, k, m),
            }
        }
    };
    let error = match &prep.body {
        Shape::Ball { radius, .. } => {
            let residual = s - &coefficients * functionals;
            if residual.amax() == 0.0 {
                0.0
            } else {
                radius * t.from_l2_operator_norm(&residual)
            }
        }
        Shape::Polytope(verts) => verts
            .iter()
            .map(|v| norm_eval(&(s * v - &offset - &coefficients * (functionals * v)), t))
            .fold(0.0, f64::max),
    };
    Ok(AffineFit {
        error,
        functionals: functionals.clone(),
        coefficients,
        offset,
    })
}

/// Row-by-row minimax fit in `ℓ∞`.
fn fit_linf(z: &[DVector<f64>], y: &[DVector<f64>], k: usize, m: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let mut c = DMatrix::zeros(m, k);
    let mut c0 = DVector::zeros(m);
    for i in 0..m {
        // variables: coefficients (k), offset, slack
        let mut obj = vec![0.0; k + 2];
        obj[k + 1] = 1.0;
        let mut lp = LpProblem::free(obj, Sense::Minimize);
        lp.set_bounds(k + 1, Some(0.0), None);
        for (zk, yk) in z.iter().zip(y) {
            let mut up: Vec<f64> = zk.iter().copied().collect();
            up.push(1.0);
            up.push(1.0);
            lp.ge(up, yk[i]);
            let mut dn: Vec<f64> = zk.iter().map(|x| -x).collect();
            dn.push(-1.0);
            dn.push(1.0);
            lp.ge(dn, -yk[i]);
        }
        let sol = lp_solve(&lp)?;
        for j in 0..k {
            c[(i, j)] = sol.x[j];
        }
        c0[i] = sol.x[k];
    }
    Ok((c, c0))
}

/// Joint minimax fit in `ℓ1`.
fn fit_l1(z: &[DVector<f64>], y: &[DVector<f64>], k: usize, m: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
    // variables: C (m·k, row-major), c0 (m), u (points·m), s
    let np = z.len();
    let nc = m * k;
    let nu = np * m;
    let nv = nc + m + nu + 1;
    let mut obj = vec![0.0; nv];
    obj[nv - 1] = 1.0;
    let mut lp = LpProblem::free(obj, Sense::Minimize);
    for j in nc + m..nv {
        lp.set_bounds(j, Some(0.0), None);
    }
    for (p, (zp, yp)) in z.iter().zip(y).enumerate() {
        let mut sum = vec![0.0; nv];
        sum[nv - 1] = -1.0;
        for i in 0..m {
            let u = nc + m + p * m + i;
            sum[u] = 1.0;
            let mut up = vec![0.0; nv];
            let mut dn = vec![0.0; nv];
            for j in 0..k {
                up[i * k + j] = zp[j];
                dn[i * k + j] = -zp[j];
            }
            up[nc + i] = 1.0;
            dn[nc + i] = -1.0;
            up[u] = 1.0;
            dn[u] = 1.0;
            lp.ge(up, yp[i]);
            lp.ge(dn, -yp[i]);
        }
        lp.le(sum, 0.0);
    }
    let sol = lp_solve(&lp)?;
    let c = DMatrix::from_fn(m, k, |i, j| sol.x[i * k + j]);
    let c0 = DVector::from_fn(m, |i, _| sol.x[nc + i]);
    Ok((c, c0))
}

/// Minimax fit in `ℓ2` by Lawson's reweighted least squares; the best
/// iterate is kept.
fn fit_l2(z: &[DVector<f64>], y: &[DVector<f64>], k: usize, m: usize) -> (DMatrix<f64>, DVector<f64>) {
    let np = z.len();
    let x = DMatrix::from_fn(np, k + 1, |p, j| if j == 0 { 1.0 } else { z[p][j - 1] });
    let yt = DMatrix::from_fn(np, m, |p, i| y[p][i]);
    let mut w = vec![1.0 / np as f64; np];
    let mut best: Option<(f64, DMatrix<f64>)> = None;
    for _ in 0..LAWSON_ITERS {
        let sw = DMatrix::from_fn(np, np, |i, j| if i == j { w[i].sqrt() } else { 0.0 });
        let theta = pseudo_inverse(&(&sw * &x), 1e-12) * (&sw * &yt);
        let resid = &yt - &x * &theta;
        let r: Vec<f64> = resid.row_iter().map(|row| row.norm()).collect();
        let err = r.iter().copied().fold(0.0, f64::max);
        if best.as_ref().is_none_or(|b| err < b.0) {
            best = Some((err, theta));
        }
        let total: f64 = w.iter().zip(&r).map(|(a, b)| a * b).sum();
        if total <= 0.0 {
            break;
        }
        for (wi, ri) in w.iter_mut().zip(&r) {
            *wi = *wi * ri / total;
        }
    }
    let theta = best.map(|b| b.1).unwrap_or_else(|| DMatrix::zeros(k + 1, m));
    let c0 = theta.row(0).transpose();
    let c = theta.rows(1, k).transpose();
    (c, c0)
}

fn upper(ctx: &Context) -> Result<Side> {
    let inst = ctx.inst;
    let n = ctx.n;
    let d = ctx.d();
    if n >= ctx.rank() || ctx.singular_value().is_some() {
        let fit = affine_error(inst, &ctx.right_frame(n).transpose())?;
        return Ok(Side::new(fit.error, true, fit.witness()));
    }
    let mut candidates = vec![ctx.right_frame(n)];
    if let Some(f) = &ctx.g_upper()?.frame {
        candidates.insert(0, f.clone());
    }
    let mut generic = ctx.generic_frames(d, n, 5);
    let structured = generic.len().saturating_sub(ctx.cfg.restarts.min(super::context::RANDOM_CAP));
    generic.truncate(structured + RANDOM_CAP);
    candidates.extend(generic);
    let eval = |f: &DMatrix<f64>| affine_error(inst, &f.transpose()).ok().map(|a| a.error);
    let budget = SearchConfig {
        max_iters: ctx.cfg.max_iters / 4,
        ..*ctx.cfg
    };
    let Some((frame, _)) = search_frames(candidates, eval, 1, &budget) else {
        return Ok(Side::unbounded());
    };
    let fit = affine_error(inst, &frame.transpose())?;
    Ok(Side::new(fit.error, true, fit.witness()))
}

pub(crate) fn bounds(ctx: &Context) -> Result<Bounds> {
    let lower = match ctx.singular_value() {
        Some(v) => Side::closed(v, "r·σ_{n+1}(S)"),
        None => Side::zero_lower().max_lower(implied(&ctx.gelfand_lower()?, "gelfand")),
    };
    Ok(Bounds::new(WidthKind::Approximation, ctx.n, lower, upper(ctx)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::ConvexBody;

    #[test]
    fn diamond_rank_one_map() {
        let inst = Instance::from_parts(
            DMatrix::identity(2, 2),
            NormTag::L1,
            NormTag::Linf,
            ConvexBody::lp_ball(NormTag::L1, 1.0, 2),
        )
        .unwrap();
        let fit = affine_error(&inst, &DMatrix::from_row_slice(1, 2, &[1.0, 1.0])).unwrap();
        assert!((fit.error - 0.5).abs() < 1e-9);
    }

    #[test]
    fn euclidean_fit_of_triangle() {
        let tri = ConvexBody::vpolytope(vec![
            DVector::from_vec(vec![0.0, 0.0]),
            DVector::from_vec(vec![2.0, 0.0]),
            DVector::from_vec(vec![1.0, 0.1]),
        ]);
        let inst = Instance::from_parts(DMatrix::identity(2, 2), NormTag::L2, NormTag::L2, tri).unwrap();
        let fit = affine_error(&inst, &DMatrix::zeros(0, 2)).unwrap();
        // minimal enclosing ball of the triangle has radius 1
        assert!((fit.error - 1.0).abs() < 1e-12);
    }
}
