//! Chebyshev centre of the image of a consistent set
//! `S({f ∈ F : N f = y})`.

use nalgebra::{DMatrix, DVector};

use super::lp::{lp_solve, LpProblem, Sense};
use super::linalg::solve_square;
use super::polytope::{binomial, for_each_combination, section_vertices, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::spaces::{norm_eval, Functional, Instance, NormTag, Shape, Subspace};

const MINIMAX_ITERS: usize = 4000;

#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevCenter {
    /// Centre in the target space.
    pub center: DVector<f64>,
    /// `sup` of `‖S f − center‖` over the consistent set.
    pub radius: f64,
    /// `false` when the centre came from the iterative Euclidean minimax and
    /// may be slightly off the optimum (the radius is still the exact error of
    /// the returned centre).
    pub certified: bool,
}

fn info_matrix(info: &[Functional], d: usize) -> Result<DMatrix<f64>> {
    for f in info {
        if f.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: f.dim() });
        }
    }
    Ok(DMatrix::from_fn(info.len(), d, |i, j| info[i].coefficients[j]))
}

/// Vertices of `{f ∈ F : N f = y}` for polytopal `F`.
pub fn consistent_vertices(inst: &Instance, info: &[Functional], y: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
    let prep = inst.prepared()?;
    let Shape::Polytope(verts) = &prep.body else {
        return Err(Error::WrongRegime("consistent vertices need a polytope".into()));
    };
    let n = info_matrix(info, inst.source_dim())?;
    if y.len() != info.len() {
        return Err(Error::DimensionMismatch { expected: info.len(), found: y.len() });
    }
    let sv = section_vertices(verts, &n, y, DEFAULT_BUDGET)?;
    if sv.is_empty() {
        return Err(Error::Inconsistent);
    }
    Ok(sv.into_iter().map(|s| s.point).collect())
}

/// Centre minimizing the largest `t`-distance to a finite point set.
pub fn point_set_center(points: &[DVector<f64>], t: NormTag) -> Result<ChebyshevCenter> {
    let m = points[0].len();
    match t {
        NormTag::Linf => {
            let mut center = DVector::zeros(m);
            let mut radius: f64 = 0.0;
            for i in 0..m {
                let lo = points.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min);
                let hi = points.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max);
                center[i] = 0.5 * (lo + hi);
                radius = radius.max(0.5 * (hi - lo));
            }
            Ok(ChebyshevCenter { center, radius, certified: true })
        }
        NormTag::L1 => {
            // variables: c (m, free), t, u (points × m)
            let np = points.len();
            let nv = m + 1 + np * m;
            let mut obj = vec![0.0; nv];
            obj[m] = 1.0;
            let mut lp = LpProblem::free(obj, Sense::Minimize);
            for j in m..nv {
                lp.set_bounds(j, Some(0.0), None);
            }
            for (k, p) in points.iter().enumerate() {
                let mut sum = vec![0.0; nv];
                sum[m] = -1.0;
                for i in 0..m {
                    let u = m + 1 + k * m + i;
                    sum[u] = 1.0;
                    let mut a = vec![0.0; nv];
                    a[u] = 1.0;
                    a[i] = 1.0;
                    lp.ge(a, p[i]);
                    let mut b = vec![0.0; nv];
                    b[u] = 1.0;
                    b[i] = -1.0;
                    lp.ge(b, -p[i]);
                }
                lp.le(sum, 0.0);
            }
            let sol = lp_solve(&lp)?;
            let center = DVector::from_vec(sol.x[..m].to_vec());
            let radius = points.iter().map(|p| norm_eval(&(p - &center), t)).fold(0.0, f64::max);
            Ok(ChebyshevCenter { center, radius, certified: true })
        }
        NormTag::L2 => Ok(euclidean_center(points)),
    }
}

/// Smallest enclosing Euclidean ball. Its centre is the circumcentre of an
/// affinely independent subset of at most `m + 1` points, so enumerating
/// those subsets is exact; past the budget the iterative estimate is used.
fn euclidean_center(points: &[DVector<f64>]) -> ChebyshevCenter {
    let m = points[0].len();
    let mut pts: Vec<DVector<f64>> = Vec::new();
    for p in points {
        if pts.iter().all(|q| (q - p).amax() > 1e-13 * (1.0 + p.amax())) {
            pts.push(p.clone());
        }
    }
    let np = pts.len();
    let top = np.min(m + 1);
    let total: u64 = (1..=top).map(|k| binomial(np, k)).fold(0u64, |a, b| a.saturating_add(b));
    let radius_of = |c: &DVector<f64>| pts.iter().map(|p| (p - c).norm()).fold(0.0, f64::max);
    if total > DEFAULT_BUDGET {
        let c = iterative_center(&pts);
        let radius = radius_of(&c);
        return ChebyshevCenter {
            center: c,
            radius,
            certified: false,
        };
    }
    let mut best = (pts[0].clone(), radius_of(&pts[0]));
    for k in 2..=top {
        for_each_combination(np, k, |idx| {
            if let Some(c) = circumcenter(&pts, idx) {
                let r = radius_of(&c);
                if r < best.1 {
                    best = (c, r);
                }
            }
        });
    }
    ChebyshevCenter {
        center: best.0,
        radius: best.1,
        certified: true,
    }
}

/// Centre of the sphere through the indexed points within their affine hull.
fn circumcenter(pts: &[DVector<f64>], idx: &[usize]) -> Option<DVector<f64>> {
    let q0 = &pts[idx[0]];
    let d = DMatrix::from_columns(&idx[1..].iter().map(|&i| &pts[i] - q0).collect::<Vec<_>>());
    let g = d.transpose() * &d;
    let rhs = DVector::from_fn(g.nrows(), |i, _| 0.5 * g[(i, i)]);
    let t = solve_square(&g, &rhs)?;
    Some(q0 + d * t)
}

fn iterative_center(points: &[DVector<f64>]) -> DVector<f64> {
    let mut c = points[0].clone();
    for it in 1..=MINIMAX_ITERS {
        let far = points
            .iter()
            .max_by(|a, b| (*a - &c).norm().partial_cmp(&(*b - &c).norm()).unwrap())
            .unwrap();
        c += (far - &c) / (it as f64 + 1.0);
    }
    c
}

/// Chebyshev centre and radius of `S({f ∈ F : N f = y})` in the target norm.
pub fn chebyshev_center(inst: &Instance, info: &[Functional], y: &DVector<f64>) -> Result<ChebyshevCenter> {
    let d = inst.source_dim();
    let t = inst.target_norm();
    let prep = inst.prepared()?;
    match &prep.body {
        Shape::Polytope(_) => {
            let verts = consistent_vertices(inst, info, y)?;
            let images: Vec<DVector<f64>> = verts.iter().map(|v| inst.op.apply(v)).collect();
            point_set_center(&images, t)
        }
        Shape::Ball { center, radius } => {
            let n = info_matrix(info, d)?;
            if y.len() != info.len() {
                return Err(Error::DimensionMismatch { expected: info.len(), found: y.len() });
            }
            let (f0, kernel) = if info.is_empty() {
                (center.clone(), Subspace::full(d))
            } else {
                let resid = y - &n * center;
                let f0 = center + min_norm_solution(&n, &resid);
                if (&n * &f0 - y).amax() > 1e-9 * (1.0 + y.amax()) {
                    return Err(Error::Inconsistent);
                }
                (f0, Subspace::kernel_of_rows(&n, d))
            };
            let delta = (&f0 - center).norm();
            if delta > radius + 1e-12 {
                return Err(Error::Inconsistent);
            }
            let rho = (radius * radius - delta * delta).max(0.0).sqrt();
            let sk = inst.matrix() * kernel.basis();
            let op = if sk.ncols() == 0 { 0.0 } else { t.from_l2_operator_norm(&sk) };
            Ok(ChebyshevCenter {
                center: inst.op.apply(&f0),
                radius: rho * op,
                certified: t != NormTag::L1 || sk.nrows() <= 20,
            })
        }
    }
}

/// Minimum-norm solution of `n x = r` via the pseudo-inverse.
fn min_norm_solution(n: &DMatrix<f64>, r: &DVector<f64>) -> DVector<f64> {
    let dec = crate::numerics::linalg::svd(n);
    let k = dec.rank();
    let mut x = DVector::zeros(n.ncols());
    for i in 0..k {
        let coef = dec.u.column(i).dot(r) / dec.sigma[i];
        x += dec.v.column(i) * coef;
    }
    x
}
