//! Brute-force vertex and facet enumeration for small polytopes.
//!
//! Everything here enumerates index subsets, so each routine takes a budget on
//! the number of subsets it may visit and fails with
//! [`Error::BudgetExceeded`] instead of running away.

use nalgebra::{DMatrix, DVector};

use super::linalg::{kernel_basis, least_squares, solve_square, svd};
use super::lp::{lp_solve, LpProblem, Sense};
use crate::error::{Error, Result};

/// Default cap on the number of index subsets visited by one enumeration.
pub const DEFAULT_BUDGET: u64 = 400_000;

/// Half-space representation `{x : a x ≤ b}` with unit-norm rows.
#[derive(Debug, Clone, PartialEq)]
pub struct HRep {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl HRep {
    /// Normalizes rows to unit Euclidean norm; zero rows must have `b ≥ 0` and are dropped.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: b.len(),
            });
        }
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for i in 0..a.nrows() {
            let r = a.row(i);
            let n = r.norm();
            if n < 1e-14 {
                if b[i] < -1e-12 {
                    return Err(Error::InvalidBody("constraint 0 ≤ negative".into()));
                }
                continue;
            }
            rows.push(r / n);
            rhs.push(b[i] / n);
        }
        let d = a.ncols();
        let a = if rows.is_empty() {
            DMatrix::zeros(0, d)
        } else {
            DMatrix::from_rows(&rows)
        };
        Ok(Self {
            a,
            b: DVector::from_vec(rhs),
        })
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn len(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.a.nrows() == 0
    }

    /// Largest constraint violation `max_i (a_i x − b_i)`, or `−∞` with no rows.
    pub fn violation(&self, x: &DVector<f64>) -> f64 {
        let ax = &self.a * x;
        (0..self.len())
            .map(|i| ax[i] - self.b[i])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.is_empty() || self.violation(x) <= tol
    }

    pub fn translate(&self, offset: &DVector<f64>) -> HRep {
        HRep {
            a: self.a.clone(),
            b: &self.b + &self.a * offset,
        }
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Visits every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_combination<F: FnMut(&[usize])>(n: usize, k: usize, mut f: F) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        if idx[i] == i + n - k {
            return;
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn check_budget(n: usize, k: usize, budget: u64, what: &str) -> Result<()> {
    let c = binomial(n, k);
    if c > budget {
        return Err(Error::BudgetExceeded(format!(
            "{what}: C({n},{k}) = {c} subsets exceeds {budget}"
        )));
    }
    Ok(())
}

fn points_scale(points: &[DVector<f64>]) -> f64 {
    points.iter().map(|p| p.amax()).fold(1.0, f64::max)
}

fn push_unique(list: &mut Vec<DVector<f64>>, p: DVector<f64>, tol: f64) -> bool {
    if list.iter().any(|q| (q - &p).amax() <= tol) {
        return false;
    }
    list.push(p);
    true
}

/// Vertices of a bounded H-polytope by solving every `d × d` active system.
pub fn hrep_vertices(h: &HRep, budget: u64) -> Result<Vec<DVector<f64>>> {
    let d = h.dim();
    let m = h.len();
    check_budget(m, d, budget, "vertex enumeration")?;
    let scale = h.b.amax().max(1.0);
    let tol = 1e-9 * scale;
    let mut out: Vec<DVector<f64>> = Vec::new();
    for_each_combination(m, d, |idx| {
        let a = DMatrix::from_fn(d, d, |i, j| h.a[(idx[i], j)]);
        let b = DVector::from_fn(d, |i, _| h.b[idx[i]]);
        if let Some(x) = solve_square(&a, &b) {
            if h.violation(&x) <= tol {
                push_unique(&mut out, x, 1e-9 * scale);
            }
        }
    });
    if out.is_empty() {
        return Err(Error::InvalidBody("H-polytope has no vertices".into()));
    }
    Ok(out)
}

/// `true` iff `x` lies within max-norm distance `tol` of the convex hull of `points`.
pub fn in_hull(points: &[DVector<f64>], x: &DVector<f64>, tol: f64) -> bool {
    hull_distance(points, x).map(|t| t <= tol).unwrap_or(false)
}

/// Max-norm distance from `x` to the convex hull of `points` (an LP).
pub fn hull_distance(points: &[DVector<f64>], x: &DVector<f64>) -> Result<f64> {
    let n = points.len();
    let d = x.len();
    // variables: w_0..w_{n-1}, t
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    let mut p = LpProblem::new(obj, Sense::Minimize);
    let mut ones = vec![1.0; n + 1];
    ones[n] = 0.0;
    p.eq(ones, 1.0);
    for i in 0..d {
        let mut row: Vec<f64> = points.iter().map(|v| v[i]).collect();
        row.push(-1.0);
        p.le(row.clone(), x[i]);
        let mut row2: Vec<f64> = points.iter().map(|v| v[i]).collect();
        row2.push(1.0);
        p.ge(row2, x[i]);
    }
    Ok(lp_solve(&p)?.value)
}

/// Indices of the extreme points among `points` (duplicates keep the first copy).
pub fn extreme_points(points: &[DVector<f64>]) -> Vec<usize> {
    let scale = points_scale(points);
    let tol = 1e-9 * scale;
    let mut distinct: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if !distinct.iter().any(|&j| (&points[j] - p).amax() <= tol) {
            distinct.push(i);
        }
    }
    if distinct.len() <= 2 {
        return distinct;
    }
    distinct
        .iter()
        .copied()
        .filter(|&i| {
            let others: Vec<DVector<f64>> = distinct
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| points[j].clone())
                .collect();
            !in_hull(&others, &points[i], tol)
        })
        .collect()
}

/// Affine hull of a point set: centroid, orthonormal directions, and the
/// orthonormal complement.
pub struct AffineHull {
    pub origin: DVector<f64>,
    pub directions: DMatrix<f64>,
    pub normals: DMatrix<f64>,
}

pub fn affine_hull(points: &[DVector<f64>]) -> AffineHull {
    let d = points[0].len();
    let n = points.len();
    let origin = points.iter().fold(DVector::zeros(d), |acc, p| acc + p) / n as f64;
    let centered = DMatrix::from_fn(d, n, |i, j| points[j][i] - origin[i]);
    let dec = svd(&centered);
    let scale = points_scale(points);
    let r = dec.sigma.iter().filter(|&&s| s > 1e-9 * scale).count();
    let directions = dec.u.columns(0, r).into_owned();
    let normals = if r == 0 {
        DMatrix::identity(d, d)
    } else {
        kernel_basis(&directions.transpose(), d)
    };
    AffineHull {
        origin,
        directions,
        normals,
    }
}

/// Facet description of the convex hull of `points`; lower-dimensional hulls
/// get their affine equalities as pairs of opposite inequalities.
pub fn vrep_facets(points: &[DVector<f64>], budget: u64) -> Result<HRep> {
    if points.is_empty() {
        return Err(Error::InvalidBody("empty vertex list".into()));
    }
    let d = points[0].len();
    let hull = affine_hull(points);
    let r = hull.directions.ncols();
    let scale = points_scale(points);
    let tol = 1e-9 * scale;
    let mut rows: Vec<DVector<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for k in 0..hull.normals.ncols() {
        let nrm = hull.normals.column(k).into_owned();
        let off = nrm.dot(&hull.origin);
        rows.push(nrm.clone());
        rhs.push(off);
        rows.push(-nrm);
        rhs.push(-off);
    }
    if r > 0 {
        let z: Vec<DVector<f64>> = points
            .iter()
            .map(|p| hull.directions.transpose() * (p - &hull.origin))
            .collect();
        let idx = extreme_points(&z);
        let zs: Vec<DVector<f64>> = idx.iter().map(|&i| z[i].clone()).collect();
        check_budget(zs.len(), r, budget, "facet enumeration")?;
        let mut normals: Vec<(DVector<f64>, f64)> = Vec::new();
        for_each_combination(zs.len(), r, |sub| {
            let normal = if r == 1 {
                DVector::from_element(1, 1.0)
            } else {
                let diffs =
                    DMatrix::from_fn(r - 1, r, |i, j| zs[sub[i + 1]][j] - zs[sub[0]][j]);
                let ker = kernel_basis(&diffs, r);
                if ker.ncols() != 1 {
                    return;
                }
                ker.column(0).into_owned()
            };
            let beta = normal.dot(&zs[sub[0]]);
            let vals: Vec<f64> = zs.iter().map(|q| normal.dot(q) - beta).collect();
            let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let candidates: Vec<(DVector<f64>, f64)> = if r == 1 {
                let lo = zs.iter().map(|q| q[0]).fold(f64::INFINITY, f64::min);
                let hi = zs.iter().map(|q| q[0]).fold(f64::NEG_INFINITY, f64::max);
                vec![(normal.clone(), hi), (-normal.clone(), -lo)]
            } else if max <= tol {
                vec![(normal, beta)]
            } else if min >= -tol {
                vec![(-normal, -beta)]
            } else {
                vec![]
            };
            for (nv, b) in candidates {
                if !normals
                    .iter()
                    .any(|(m, c)| (m - &nv).amax() <= 1e-8 && (c - b).abs() <= 1e-8 * scale)
                {
                    normals.push((nv, b));
                }
            }
        });
        for (nv, b) in normals {
            let a = &hull.directions * &nv;
            let off = b + a.dot(&hull.origin);
            rows.push(a);
            rhs.push(off);
        }
    }
    let a = if rows.is_empty() {
        DMatrix::zeros(0, d)
    } else {
        DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j])
    };
    HRep::new(a, DVector::from_vec(rhs))
}

/// A vertex of a polytope section with the convex weights that produce it.
#[derive(Debug, Clone)]
pub struct SectionVertex {
    pub point: DVector<f64>,
    /// `(index into the generating points, weight)` with positive weights summing to one.
    pub weights: Vec<(usize, f64)>,
}

/// Vertices of `conv(points) ∩ {x : eq x = rhs}` via basic feasible solutions
/// of the weight system. Returns an empty list when the section is empty.
pub fn section_vertices(
    points: &[DVector<f64>],
    eq: &DMatrix<f64>,
    rhs: &DVector<f64>,
    budget: u64,
) -> Result<Vec<SectionVertex>> {
    let n = points.len();
    let r = eq.nrows();
    let scale = points_scale(points).max(rhs.amax());
    let tol = 1e-9 * scale;
    if r == 0 {
        return Ok(points
            .iter()
            .enumerate()
            .map(|(i, p)| SectionVertex {
                point: p.clone(),
                weights: vec![(i, 1.0)],
            })
            .collect());
    }
    let mut m = DMatrix::zeros(r + 1, n);
    for j in 0..n {
        m[(0, j)] = 1.0;
        let ep = eq * &points[j];
        for i in 0..r {
            m[(i + 1, j)] = ep[i];
        }
    }
    let mut b = DVector::zeros(r + 1);
    b[0] = 1.0;
    for i in 0..r {
        b[i + 1] = rhs[i];
    }
    let s = svd(&m).rank().max(1);
    check_budget(n, s, budget, "section enumeration")?;
    let mut out: Vec<SectionVertex> = Vec::new();
    let mut seen: Vec<DVector<f64>> = Vec::new();
    for_each_combination(n, s, |idx| {
        let mj = DMatrix::from_fn(r + 1, s, |i, j| m[(i, idx[j])]);
        let Some((w, resid)) = least_squares(&mj, &b) else {
            return;
        };
        if resid > 1e-9 * (1.0 + b.amax()) || w.iter().any(|&x| x < -1e-10) {
            return;
        }
        let mut point = DVector::zeros(points[0].len());
        let mut weights = Vec::new();
        for (k, &i) in idx.iter().enumerate() {
            let wk = w[k].max(0.0);
            if wk > 1e-13 {
                point += &points[i] * wk;
                weights.push((i, wk));
            }
        }
        let total: f64 = weights.iter().map(|(_, x)| x).sum();
        if total <= 0.0 {
            return;
        }
        if push_unique(&mut seen, point.clone(), tol) {
            out.push(SectionVertex { point, weights });
        }
    });
    // basic solutions can land inside the section; keep the extreme ones
    let pts: Vec<DVector<f64>> = out.iter().map(|s| s.point.clone()).collect();
    let keep = extreme_points(&pts);
    Ok(keep.into_iter().map(|i| out[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_vec(xs.to_vec())
    }

    #[test]
    fn combinations_are_lexicographic() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |c| seen.push(c.to_vec()));
        assert_eq!(
            seen,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        let mut count = 0;
        for_each_combination(5, 0, |_| count += 1);
        assert_eq!(count, 1);
        assert_eq!(binomial(20, 4), 4845);
    }

    #[test]
    fn square_vertices_and_facets() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        let b = v(&[1.0, 0.0, 1.0, 0.0]);
        let h = HRep::new(a, b).unwrap();
        let verts = hrep_vertices(&h, DEFAULT_BUDGET).unwrap();
        assert_eq!(verts.len(), 4);
        let f = vrep_facets(&verts, DEFAULT_BUDGET).unwrap();
        assert_eq!(f.len(), 4);
        assert!(f.contains(&v(&[0.5, 0.5]), 1e-12));
        assert!(!f.contains(&v(&[1.5, 0.5]), 1e-9));
    }

    #[test]
    fn interior_points_are_pruned() {
        let pts = vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.2, 0.2])];
        assert_eq!(extreme_points(&pts), vec![0, 1, 2]);
    }

    #[test]
    fn flat_polytope_facets_include_equalities() {
        let pts = vec![v(&[0.0, 0.0, 1.0]), v(&[1.0, 0.0, 1.0]), v(&[0.0, 1.0, 1.0])];
        let f = vrep_facets(&pts, DEFAULT_BUDGET).unwrap();
        assert!(f.contains(&v(&[0.2, 0.2, 1.0]), 1e-9));
        assert!(!f.contains(&v(&[0.2, 0.2, 1.1]), 1e-9));
    }

    #[test]
    fn section_of_diamond_by_diagonal() {
        let pts = vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, -1.0])];
        // x − y = 0
        let eq = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let sv = section_vertices(&pts, &eq, &v(&[0.0]), DEFAULT_BUDGET).unwrap();
        assert_eq!(sv.len(), 2);
        for s in sv {
            assert!((s.point[0].abs() - 0.5).abs() < 1e-12);
            assert!((s.point[0] - s.point[1]).abs() < 1e-12);
        }
    }
}
