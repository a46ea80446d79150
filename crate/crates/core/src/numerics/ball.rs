//! Largest ball of the seminorm `‖S·‖`, restricted to a subspace, inside `F`.

use nalgebra::{DMatrix, DVector};

use super::linalg::svd;
use super::lp::{lp_solve, LpProblem, Sense};
use super::polytope::{hrep_vertices, HRep, DEFAULT_BUDGET};
use super::SearchConfig;
use crate::error::{Error, Result};
use crate::spaces::{Instance, NormTag, Shape, Subspace};

/// Threshold on the smallest singular value of `S` restricted to the subspace.
pub const INJECTIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct InscribedBall {
    pub radius: f64,
    pub center: DVector<f64>,
    /// Orthonormal basis of the ball's subspace.
    pub basis: DMatrix<f64>,
    pub certified: bool,
}

/// `sup { a · z : ‖m z‖_t ≤ 1 }` for injective `m`.
pub fn dual_seminorm(a: &DVector<f64>, m: &DMatrix<f64>, t: NormTag) -> Result<f64> {
    Ok(dual_seminorm_arg(a, m, t)?.0)
}

/// [`dual_seminorm`] together with a maximizer `z`.
pub fn dual_seminorm_arg(a: &DVector<f64>, m: &DMatrix<f64>, t: NormTag) -> Result<(f64, DVector<f64>)> {
    let k = m.ncols();
    match t {
        NormTag::L2 => {
            let dec = svd(m);
            let w = dec.v.transpose() * a;
            let coef = DVector::from_fn(k, |i, _| w[i] / (dec.sigma[i] * dec.sigma[i]));
            let z = &dec.v * coef;
            let value = (0..k).map(|i| (w[i] / dec.sigma[i]).powi(2)).sum::<f64>().sqrt();
            if value == 0.0 {
                return Ok((0.0, DVector::zeros(k)));
            }
            Ok((value, z / value))
        }
        NormTag::Linf => {
            let mut p = LpProblem::free(a.iter().copied().collect(), Sense::Maximize);
            for j in 0..m.nrows() {
                let row: Vec<f64> = m.row(j).iter().copied().collect();
                p.le(row.clone(), 1.0);
                p.ge(row, -1.0);
            }
            let sol = lp_solve(&p)?;
            Ok((sol.value, DVector::from_vec(sol.x[..k].to_vec())))
        }
        NormTag::L1 => {
            let rows = m.nrows();
            let mut obj: Vec<f64> = a.iter().copied().collect();
            obj.extend(std::iter::repeat_n(0.0, rows));
            let mut p = LpProblem::free(obj, Sense::Maximize);
            for j in 0..rows {
                p.set_bounds(k + j, Some(0.0), None);
                let mut plus = vec![0.0; k + rows];
                let mut minus = vec![0.0; k + rows];
                for c in 0..k {
                    plus[c] = -m[(j, c)];
                    minus[c] = m[(j, c)];
                }
                plus[k + j] = 1.0;
                minus[k + j] = 1.0;
                p.ge(plus, 0.0);
                p.ge(minus, 0.0);
            }
            let mut sum = vec![0.0; k + rows];
            for j in 0..rows {
                sum[k + j] = 1.0;
            }
            p.le(sum, 1.0);
            let sol = lp_solve(&p)?;
            Ok((sol.value, DVector::from_vec(sol.x[..k].to_vec())))
        }
    }
}

/// `sup { ‖z‖₂ : ‖m z‖_t ≤ 1 }` for injective `m`.
pub fn euclidean_reach(m: &DMatrix<f64>, t: NormTag) -> Result<f64> {
    Ok(euclidean_reach_arg(m, t)?.0)
}

/// [`euclidean_reach`] together with a maximizer `z`.
pub fn euclidean_reach_arg(m: &DMatrix<f64>, t: NormTag) -> Result<(f64, DVector<f64>)> {
    let k = m.ncols();
    let rows: Vec<DVector<f64>> = match t {
        NormTag::L2 => {
            let dec = svd(m);
            let s = dec.sigma[k - 1];
            return Ok((1.0 / s, dec.v.column(k - 1) / s));
        }
        NormTag::Linf => (0..m.nrows())
            .flat_map(|j| {
                let r = m.row(j).transpose();
                [r.clone(), -r]
            })
            .collect(),
        NormTag::L1 => {
            let rows = m.nrows();
            if rows > 12 {
                return Err(Error::Unsupported(format!("sign enumeration over {rows} rows")));
            }
            (0..1u64 << rows)
                .map(|mask| {
                    let s = DVector::from_fn(rows, |i, _| if (mask >> i) & 1 == 1 { -1.0 } else { 1.0 });
                    m.transpose() * s
                })
                .collect()
        }
    };
    let a = DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j]);
    let h = HRep::new(a, DVector::from_element(rows.len(), 1.0))?;
    let verts = hrep_vertices(&h, DEFAULT_BUDGET)?;
    let best = verts
        .into_iter()
        .fold((0.0, DVector::zeros(k)), |acc, v| if v.norm() > acc.0 { (v.norm(), v) } else { acc });
    Ok(best)
}

/// Largest `r` with `c + {v ∈ sub : ‖S v‖ ≤ r} ⊆ F`.
///
/// With `anchor = Some(x)` the centre is restricted to `x + sub`; otherwise it
/// ranges over all of `F`.
pub fn inscribed_ball(
    inst: &Instance,
    anchor: Option<&DVector<f64>>,
    sub: &Subspace,
    _cfg: &SearchConfig,
) -> Result<InscribedBall> {
    let d = inst.source_dim();
    if sub.ambient_dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: sub.ambient_dim(),
        });
    }
    let q = sub.basis();
    let k = q.ncols();
    if k == 0 {
        return Err(Error::WrongRegime("inscribed ball needs a nonzero subspace".into()));
    }
    let sq = inst.matrix() * q;
    let sigma_min = svd(&sq).sigma.get(k - 1).copied().unwrap_or(0.0);
    if sq.nrows() < k || sigma_min <= INJECTIVITY_TOL {
        return Err(Error::NotInjective { sigma_min });
    }
    let t = inst.target_norm();
    let prep = inst.prepared()?;
    match &prep.body {
        Shape::Ball { center, radius } => {
            let rho = euclidean_reach(&sq, t)?;
            let c = match anchor {
                None => center.clone(),
                Some(x) => x + sub.project(&(center - x)),
            };
            let delta = (&c - center).norm();
            if delta > *radius + 1e-12 {
                return Err(Error::EmptySection);
            }
            Ok(InscribedBall {
                radius: ((radius - delta) / rho).max(0.0),
                center: c,
                basis: q.clone(),
                certified: true,
            })
        }
        Shape::Polytope(_) => {
            let h = prep.body_hrep(&inst.body)?;
            let mut hs = Vec::with_capacity(h.len());
            for i in 0..h.len() {
                let a = q.transpose() * h.a.row(i).transpose();
                hs.push(dual_seminorm(&a, &sq, t)?);
            }
            let nv = match anchor {
                None => d,
                Some(_) => k,
            };
            let mut obj = vec![0.0; nv + 1];
            obj[nv] = 1.0;
            let mut lp = LpProblem::free(obj, Sense::Maximize);
            lp.set_bounds(nv, Some(0.0), None);
            for i in 0..h.len() {
                let ai = h.a.row(i).transpose();
                let (mut row, rhs): (Vec<f64>, f64) = match anchor {
                    None => (ai.iter().copied().collect(), h.b[i]),
                    Some(x) => ((q.transpose() * &ai).iter().copied().collect(), h.b[i] - ai.dot(x)),
                };
                row.push(hs[i]);
                lp.le(row, rhs);
            }
            let sol = match lp_solve(&lp) {
                Ok(s) => s,
                Err(Error::Infeasible) => return Err(Error::EmptySection),
                Err(e) => return Err(e),
            };
            let z = DVector::from_vec(sol.x[..nv].to_vec());
            let center = match anchor {
                None => z,
                Some(x) => x + q * z,
            };
            Ok(InscribedBall {
                radius: sol.value.max(0.0),
                center,
                basis: q.clone(),
                certified: true,
            })
        }
    }
}

/// Checks `c + {v ∈ span(basis) : ‖S v‖ ≤ r} ⊆ F` through the facet
/// inequalities (polytopes) or the centre distance (balls).
pub fn ball_contained(inst: &Instance, ball: &InscribedBall, tol: f64) -> Result<bool> {
    let sq = inst.matrix() * &ball.basis;
    let t = inst.target_norm();
    let prep = inst.prepared()?;
    match &prep.body {
        Shape::Ball { center, radius } => {
            let rho = euclidean_reach(&sq, t)?;
            Ok((&ball.center - center).norm() + ball.radius * rho <= radius + tol)
        }
        Shape::Polytope(_) => {
            let h = prep.body_hrep(&inst.body)?;
            for i in 0..h.len() {
                let ai = h.a.row(i).transpose();
                let hi = dual_seminorm(&(ball.basis.transpose() * &ai), &sq, t)?;
                if ai.dot(&ball.center) + ball.radius * hi > h.b[i] + tol {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}
