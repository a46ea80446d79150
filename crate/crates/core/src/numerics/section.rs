//! `sup { ‖S p‖ : p ∈ (F − F)/2, p ∈ V }` for a linear subspace `V`.

use nalgebra::{DMatrix, DVector};

use super::lp::{lp_solve, LpProblem, Sense};
use super::polytope::{section_vertices, DEFAULT_BUDGET};
use super::search::{random_frame, rng_for};
use super::SearchConfig;
use crate::error::{Error, Result};
use crate::numerics::linalg::svd;
use crate::spaces::{norm_eval, DiffShape, Instance, NormTag, Shape, Subspace};

/// Largest target dimension for which the `ℓ1` case enumerates sign vectors.
const MAX_SIGN_ROWS: usize = 12;

/// Maximizer of the seminorm on a section of the difference body.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionMax {
    pub value: f64,
    /// `p = (f − g)/2` with `f, g ∈ F` and `p` in the subspace.
    pub p: DVector<f64>,
    pub f: DVector<f64>,
    pub g: DVector<f64>,
    /// `false` when the value came from restart search and is only a lower
    /// bound on the section supremum.
    pub certified: bool,
}

pub fn max_seminorm_on_section(inst: &Instance, sub: &Subspace, cfg: &SearchConfig) -> Result<SectionMax> {
    let d = inst.source_dim();
    if sub.ambient_dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: sub.ambient_dim(),
        });
    }
    let prep = inst.prepared()?;
    match (&prep.body, &prep.diff) {
        (Shape::Ball { center, .. }, DiffShape::Ball { radius }) => Ok(ball_section(inst, sub, center, *radius)),
        (Shape::Polytope(verts), DiffShape::Polytope { points, labels }) => {
            polytope_section(inst, sub, verts, points, labels, cfg)
        }
        _ => unreachable!("body and difference body share their shape"),
    }
}

fn zero_result(center: &DVector<f64>) -> SectionMax {
    SectionMax {
        value: 0.0,
        p: DVector::zeros(center.len()),
        f: center.clone(),
        g: center.clone(),
        certified: true,
    }
}

/// Unit vector `z` maximizing `‖m z‖_t` over the Euclidean sphere (exact).
pub(crate) fn top_direction(m: &DMatrix<f64>, t: NormTag) -> Option<DVector<f64>> {
    if m.ncols() == 0 || m.amax() == 0.0 {
        return None;
    }
    let z = match t {
        NormTag::L2 => svd(m).v.column(0).into_owned(),
        NormTag::Linf => {
            let mut best = 0;
            let mut bn = -1.0;
            for i in 0..m.nrows() {
                let n = m.row(i).norm();
                if n > bn + 1e-15 {
                    bn = n;
                    best = i;
                }
            }
            m.row(best).transpose() / bn
        }
        NormTag::L1 => {
            let rows = m.nrows();
            if rows > 20 {
                return None;
            }
            let mut best: Option<DVector<f64>> = None;
            let mut bn = -1.0;
            for mask in 0u64..(1u64 << (rows - 1)) {
                let mut acc = DVector::zeros(m.ncols());
                for i in 0..rows {
                    let s = if i > 0 && (mask >> (i - 1)) & 1 == 1 { -1.0 } else { 1.0 };
                    acc += m.row(i).transpose() * s;
                }
                let n = acc.norm();
                if n > bn + 1e-15 {
                    bn = n;
                    best = Some(acc);
                }
            }
            let v = best?;
            let n = v.norm();
            if n == 0.0 {
                return None;
            }
            v / n
        }
    };
    Some(z)
}

fn ball_section(inst: &Instance, sub: &Subspace, center: &DVector<f64>, radius: f64) -> SectionMax {
    let sq = inst.matrix() * sub.basis();
    let Some(z) = top_direction(&sq, inst.target_norm()) else {
        return zero_result(center);
    };
    let p = sub.basis() * z * radius;
    let value = inst.op.seminorm(&p);
    SectionMax {
        value,
        f: center + &p,
        g: center - &p,
        p,
        certified: true,
    }
}

fn assemble(
    w: &[(usize, f64)],
    points: &[DVector<f64>],
    labels: &[(usize, usize)],
    verts: &[DVector<f64>],
    inst: &Instance,
) -> SectionMax {
    let d = verts[0].len();
    let mut p = DVector::zeros(d);
    let mut f = DVector::zeros(d);
    let mut g = DVector::zeros(d);
    let total: f64 = w.iter().map(|(_, x)| x).sum();
    for &(k, wk) in w {
        let wk = wk / total;
        p += &points[k] * wk;
        f += &verts[labels[k].0] * wk;
        g += &verts[labels[k].1] * wk;
    }
    SectionMax {
        value: inst.op.seminorm(&p),
        p,
        f,
        g,
        certified: true,
    }
}

/// Maximizes `c · x` over `x ∈ conv(points) ∩ {cmpᵀ x = 0}`; returns the weights.
fn linear_max(points: &[DVector<f64>], cmp: &DMatrix<f64>, c: &DVector<f64>) -> Result<(f64, Vec<(usize, f64)>)> {
    let k = points.len();
    let obj: Vec<f64> = points.iter().map(|p| c.dot(p)).collect();
    let mut lp = LpProblem::new(obj, Sense::Maximize);
    lp.eq(vec![1.0; k], 1.0);
    for j in 0..cmp.ncols() {
        let col = cmp.column(j);
        lp.eq(points.iter().map(|p| col.dot(p)).collect(), 0.0);
    }
    let sol = lp_solve(&lp)?;
    let w = sol
        .x
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > 0.0)
        .map(|(i, &x)| (i, x))
        .collect();
    Ok((sol.value, w))
}

fn polytope_section(
    inst: &Instance,
    sub: &Subspace,
    verts: &[DVector<f64>],
    points: &[DVector<f64>],
    labels: &[(usize, usize)],
    cfg: &SearchConfig,
) -> Result<SectionMax> {
    let d = inst.source_dim();
    let center = verts.iter().fold(DVector::zeros(d), |a, v| a + v) / verts.len() as f64;
    if sub.dim() == 0 {
        return Ok(zero_result(&center));
    }
    let s = inst.matrix();
    let t = inst.target_norm();
    // whole space: the maximum of a convex function sits at a vertex
    if sub.dim() == d {
        let mut best = 0;
        let mut bv = -1.0;
        for (k, p) in points.iter().enumerate() {
            let v = norm_eval(&(s * p), t);
            if v > bv + 1e-15 {
                bv = v;
                best = k;
            }
        }
        return Ok(assemble(&[(best, 1.0)], points, labels, verts, inst));
    }
    let cmp = sub.complement_basis();
    let m = s.nrows();
    let mut best: Option<SectionMax> = None;
    let consider = |cand: SectionMax, best: &mut Option<SectionMax>| {
        if best.as_ref().is_none_or(|b| cand.value > b.value + 1e-13) {
            *best = Some(cand);
        }
    };
    match t {
        NormTag::Linf => {
            // the section is symmetric, so the +e_i direction suffices
            for i in 0..m {
                let c = s.row(i).transpose();
                let (_, w) = linear_max(points, &cmp, &c)?;
                consider(assemble(&w, points, labels, verts, inst), &mut best);
            }
        }
        NormTag::L1 if m <= MAX_SIGN_ROWS => {
            for mask in 0u64..(1u64 << (m - 1)) {
                let sign = DVector::from_fn(m, |i, _| if i > 0 && (mask >> (i - 1)) & 1 == 1 { -1.0 } else { 1.0 });
                let c = s.transpose() * sign;
                let (_, w) = linear_max(points, &cmp, &c)?;
                consider(assemble(&w, points, labels, verts, inst), &mut best);
            }
        }
        _ => match section_vertices(points, &cmp.transpose(), &DVector::zeros(cmp.ncols()), DEFAULT_BUDGET) {
            Ok(sv) => {
                for v in sv {
                    consider(assemble(&v.weights, points, labels, verts, inst), &mut best);
                }
            }
            Err(Error::BudgetExceeded(_)) => {
                return ascent(inst, points, labels, verts, &cmp, cfg);
            }
            Err(e) => return Err(e),
        },
    }
    Ok(best.unwrap_or_else(|| zero_result(&center)))
}

/// Restarted linearize-and-maximize ascent; the value is attained, so it is a
/// lower bound on the section supremum but is not certified optimal.
fn ascent(
    inst: &Instance,
    points: &[DVector<f64>],
    labels: &[(usize, usize)],
    verts: &[DVector<f64>],
    cmp: &DMatrix<f64>,
    cfg: &SearchConfig,
) -> Result<SectionMax> {
    let s = inst.matrix();
    let m = s.nrows();
    let restarts = cfg.restarts.clamp(1, 32);
    let mut best: Option<SectionMax> = None;
    for r in 0..restarts {
        let mut rng = rng_for(cfg.seed, 1_000 + r as u64);
        let mut dir = random_frame(m, 1, &mut rng).column(0).into_owned();
        let mut cur: Option<SectionMax> = None;
        for _ in 0..cfg.max_iters.max(1) {
            let c = s.transpose() * &dir;
            let (_, w) = linear_max(points, cmp, &c)?;
            let cand = assemble(&w, points, labels, verts, inst);
            if cur.as_ref().is_some_and(|b| cand.value <= b.value + cfg.tol) {
                break;
            }
            let y = s * &cand.p;
            match crate::spaces::norming_functional(&y, inst.target_norm()) {
                Ok(l) => dir = l.coefficients,
                Err(_) => {
                    cur = Some(cand);
                    break;
                }
            }
            cur = Some(cand);
        }
        if let Some(c) = cur {
            if best.as_ref().is_none_or(|b| c.value > b.value + 1e-13) {
                best = Some(c);
            }
        }
    }
    let mut out = best.expect("at least one restart");
    out.certified = false;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{ConvexBody, Functional};

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_vec(xs.to_vec())
    }

    #[test]
    fn ball_section_on_axis() {
        let m = DMatrix::from_diagonal(&v(&[1.0, 0.5]));
        let inst = Instance::from_parts(m, NormTag::L2, NormTag::L2, ConvexBody::lp_ball(NormTag::L2, 1.0, 2)).unwrap();
        let sub = Subspace::span_of(&[v(&[0.0, 1.0])], 2);
        let r = max_seminorm_on_section(&inst, &sub, &SearchConfig::default()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
        assert!((r.p[1].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diamond_on_diagonal() {
        let inst = Instance::from_parts(
            DMatrix::identity(2, 2),
            NormTag::L1,
            NormTag::Linf,
            ConvexBody::lp_ball(NormTag::L1, 1.0, 2),
        )
        .unwrap();
        let sub = Subspace::span_of(&[v(&[1.0, 1.0])], 2);
        let r = max_seminorm_on_section(&inst, &sub, &SearchConfig::default()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
        assert!((r.p[0].abs() - 0.5).abs() < 1e-12 && (r.p[1].abs() - 0.5).abs() < 1e-12);
        assert!(inst.contains(&r.f, 1e-9) && inst.contains(&r.g, 1e-9));
        assert!(((&r.f - &r.g) / 2.0 - &r.p).amax() < 1e-12);
    }

    #[test]
    fn kernel_of_first_coordinate() {
        let inst = Instance::from_parts(
            DMatrix::identity(3, 3),
            NormTag::L2,
            NormTag::L2,
            ConvexBody::lp_ball(NormTag::L2, 1.0, 3),
        )
        .unwrap();
        let sub = crate::spaces::nullspace(&[Functional::dirac(0, 3, NormTag::L2)], 3);
        let r = max_seminorm_on_section(&inst, &sub, &SearchConfig::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }
}
