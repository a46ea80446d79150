use nalgebra::{DMatrix, DVector};

/// Relative rank tolerance used by the null-space and orthonormalization helpers.
pub const RANK_TOL: f64 = 1e-10;

/// Thin singular value decomposition with singular values in descending order.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `m × r` left singular vectors, `r = min(m, n)`.
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    /// `n × r` right singular vectors.
    pub v: DMatrix<f64>,
}

impl Svd {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let s = DMatrix::from_diagonal(&DVector::from_vec(self.sigma.clone()));
        &self.u * s * self.v.transpose()
    }

    /// `σ_k` (0-based), zero beyond the stored values.
    pub fn sigma_at(&self, k: usize) -> f64 {
        self.sigma.get(k).copied().unwrap_or(0.0)
    }

    pub fn rank(&self) -> usize {
        let top = self.sigma.first().copied().unwrap_or(0.0);
        let thresh = RANK_TOL * top.max(1.0);
        self.sigma.iter().filter(|&&s| s > thresh).count()
    }
}

/// Sweeps of the Jacobi iteration before giving up on further rotations.
const JACOBI_SWEEPS: usize = 80;

pub fn svd(m: &DMatrix<f64>) -> Svd {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Svd {
            u: DMatrix::zeros(rows, 0),
            sigma: Vec::new(),
            v: DMatrix::zeros(cols, 0),
        };
    }
    let (u, sigma, v) = if rows >= cols {
        jacobi_svd(m)
    } else {
        let (u, s, v) = jacobi_svd(&m.transpose());
        (v, s, u)
    };
    let r = sigma.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| sigma[b].partial_cmp(&sigma[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    let mut uu = DMatrix::zeros(rows, r);
    let mut vv = DMatrix::zeros(cols, r);
    let mut sorted = Vec::with_capacity(r);
    for (dst, &src) in order.iter().enumerate() {
        let mut ucol = u.column(src).into_owned();
        let mut vcol = v.column(src).into_owned();
        // deterministic sign: largest |entry| of v positive (first index on ties)
        let mut idx = 0;
        for i in 0..vcol.len() {
            if vcol[i].abs() > vcol[idx].abs() + 1e-14 {
                idx = i;
            }
        }
        if vcol[idx] < 0.0 {
            vcol = -vcol;
            ucol = -ucol;
        }
        uu.set_column(dst, &ucol);
        vv.set_column(dst, &vcol);
        sorted.push(sigma[src]);
    }
    Svd { u: uu, sigma: sorted, v: vv }
}

/// One-sided Jacobi SVD of a tall matrix (`rows ≥ cols`): thin `U`, unsorted
/// singular values and square orthogonal `V`.
fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let n = a.ncols();
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut w, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let top = sigma.iter().copied().fold(0.0, f64::max);
    let mut cols: Vec<Option<DVector<f64>>> = (0..n)
        .map(|j| (sigma[j] > f64::EPSILON * top && sigma[j] > 0.0).then(|| w.column(j) / sigma[j]))
        .collect();
    // complete the left vectors of zero singular values to an orthonormal set
    let mut basis: Vec<DVector<f64>> = cols.iter().flatten().cloned().collect();
    let rows = a.nrows();
    let mut e = 0;
    for slot in cols.iter_mut().filter(|c| c.is_none()) {
        while e < rows {
            let mut x = DVector::from_fn(rows, |i, _| if i == e { 1.0 } else { 0.0 });
            e += 1;
            for _ in 0..2 {
                for b in &basis {
                    let d = b.dot(&x);
                    x -= b * d;
                }
            }
            let nx = x.norm();
            if nx > 1e-8 {
                let x = x / nx;
                basis.push(x.clone());
                *slot = Some(x);
                break;
            }
        }
    }
    let u = DMatrix::from_columns(&cols.into_iter().map(|c| c.expect("completed basis")).collect::<Vec<_>>());
    (u, sigma, v)
}

fn rotate_columns(m: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.nrows() {
        let x = m[(i, p)];
        let y = m[(i, q)];
        m[(i, p)] = c * x - s * y;
        m[(i, q)] = s * x + c * y;
    }
}

/// Moore–Penrose pseudo-inverse; singular values below `tol·σ_max` are dropped.
pub fn pseudo_inverse(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let dec = svd(m);
    let cut = tol * dec.sigma.first().copied().unwrap_or(0.0);
    let mut out = DMatrix::zeros(m.ncols(), m.nrows());
    for (k, &s) in dec.sigma.iter().enumerate() {
        if s > cut && s > 0.0 {
            out += dec.v.column(k) * dec.u.column(k).transpose() / s;
        }
    }
    out
}

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    svd(m).sigma
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Orthonormal basis (as columns) of the joint kernel of the rows of `rows`
/// (`k × d`). An empty row set yields the identity.
pub fn kernel_basis(rows: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    if rows.nrows() == 0 {
        return DMatrix::identity(dim, dim);
    }
    // pad to a square-or-taller matrix so the SVD returns a full V
    let k = rows.nrows();
    let padded = if k < dim {
        let mut p = DMatrix::zeros(dim, dim);
        p.view_mut((0, 0), (k, dim)).copy_from(rows);
        p
    } else {
        rows.clone()
    };
    let dec = svd(&padded);
    let top = dec.sigma.first().copied().unwrap_or(0.0);
    let thresh = RANK_TOL * top.max(1.0);
    let keep: Vec<usize> = (0..dec.sigma.len())
        .filter(|&i| dec.sigma[i] <= thresh)
        .collect();
    let mut out = DMatrix::zeros(dim, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &dec.v.column(i));
    }
    out
}

/// Orthonormal basis of the column span of `m`, in the order of modified
/// Gram–Schmidt over the columns; dependent columns are dropped.
pub fn orthonormalize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let scale = m.column_iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for c in m.column_iter() {
        let mut v = c.into_owned();
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dot(&v);
                v -= q * proj;
            }
        }
        let n = v.norm();
        if n > 1e-9 * scale {
            cols.push(v / n);
        }
    }
    if cols.is_empty() {
        return DMatrix::zeros(m.nrows(), 0);
    }
    DMatrix::from_columns(&cols)
}

/// Orthonormal basis of the orthogonal complement of the column span of `basis`.
pub fn complement(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = basis.nrows();
    if basis.ncols() == 0 {
        return DMatrix::identity(dim, dim);
    }
    kernel_basis(&basis.transpose(), dim)
}

pub fn rank(m: &DMatrix<f64>) -> usize {
    svd(m).rank()
}

/// Solves the square system `a x = b`; `None` when `a` is numerically singular.
pub fn solve_square(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let lu = a.clone().lu();
    let x = lu.solve(b)?;
    if x.iter().all(|v| v.is_finite()) {
        let scale = a.amax().max(1.0) * x.amax().max(1.0);
        let resid = (a * &x - b).amax();
        if resid <= 1e-9 * scale.max(b.amax()) {
            return Some(x);
        }
    }
    None
}

/// Solves the (possibly rectangular) full-column-rank system `a x = b` in the
/// least-squares sense and returns `x` with the residual max-norm.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let dec = svd(a);
    if dec.rank() < a.ncols() {
        return None;
    }
    let utb = dec.u.transpose() * b;
    let mut y = DVector::zeros(dec.sigma.len());
    for i in 0..dec.sigma.len() {
        y[i] = utb[i] / dec.sigma[i];
    }
    let x = &dec.v * y;
    let resid = (a * &x - b).amax();
    Some((x, resid))
}

/// Determinant via LU.
pub fn determinant(m: &DMatrix<f64>) -> f64 {
    m.clone().determinant()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_sorts_descending() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![0.25, 1.0, 0.5]));
        let s = svd(&m);
        assert_eq!(s.sigma.len(), 3);
        assert!((s.sigma[0] - 1.0).abs() < 1e-14);
        assert!((s.sigma[1] - 0.5).abs() < 1e-14);
        assert!((s.sigma[2] - 0.25).abs() < 1e-14);
        assert!((s.reconstruct() - m).norm() < 1e-12);
    }

    #[test]
    fn rank_deficient_svd_reconstructs() {
        let m = DMatrix::from_row_slice(2, 2, &[0.27596037741767954, 0.649754496223598, 0.4330297823041964, 1.0195777041753407]);
        let s = svd(&m);
        assert!((s.reconstruct() - &m).amax() < 1e-14);
        assert!((s.sigma[0] - m.norm()).abs() < 1e-14);
        assert!(s.sigma[1] < 1e-14);
        assert!((s.u.transpose() * &s.u - DMatrix::<f64>::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn wide_svd_reconstructs() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0]);
        let s = svd(&m);
        assert_eq!((s.u.shape(), s.v.shape()), ((2, 2), (3, 2)));
        assert!((s.reconstruct() - &m).amax() < 1e-13);
        assert!((s.v.transpose() * &s.v - DMatrix::<f64>::identity(2, 2)).amax() < 1e-13);
    }

    #[test]
    fn kernel_of_two_rows() {
        let rows = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 1.0, -1.0, 0.0]);
        let k = kernel_basis(&rows, 3);
        assert_eq!(k.ncols(), 1);
        assert!((k[(2, 0)].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complement_of_axis() {
        let b = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let c = complement(&b);
        assert_eq!(c.ncols(), 2);
        assert!((b.transpose() * &c).amax() < 1e-12);
    }

    #[test]
    fn gram_schmidt_drops_dependent() {
        let m = DMatrix::from_column_slice(2, 3, &[1.0, 0.0, 2.0, 0.0, 1.0, 1.0]);
        let q = orthonormalize(&m);
        assert_eq!(q.ncols(), 2);
    }
}
