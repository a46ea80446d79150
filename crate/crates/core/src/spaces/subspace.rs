use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::norm::Functional;
use crate::numerics::linalg::{complement, kernel_basis, orthonormalize};

/// A linear subspace of `ℝ^d` held as an orthonormal column basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subspace {
    #[serde(with = "crate::serde_util::dmat")]
    basis: DMatrix<f64>,
    ambient_dim: usize,
}

impl Subspace {
    pub fn full(d: usize) -> Self {
        Self {
            basis: DMatrix::identity(d, d),
            ambient_dim: d,
        }
    }

    pub fn zero(d: usize) -> Self {
        Self {
            basis: DMatrix::zeros(d, 0),
            ambient_dim: d,
        }
    }

    /// Span of the columns of `m`.
    pub fn span(m: &DMatrix<f64>) -> Self {
        Self {
            basis: orthonormalize(m),
            ambient_dim: m.nrows(),
        }
    }

    pub fn span_of(vectors: &[DVector<f64>], d: usize) -> Self {
        if vectors.is_empty() {
            return Self::zero(d);
        }
        Self::span(&DMatrix::from_columns(vectors))
    }

    /// Joint kernel of the rows of `rows` (`k × d`).
    pub fn kernel_of_rows(rows: &DMatrix<f64>, d: usize) -> Self {
        Self {
            basis: kernel_basis(rows, d),
            ambient_dim: d,
        }
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn codim(&self) -> usize {
        self.ambient_dim - self.dim()
    }

    /// Orthonormal basis of the orthogonal complement, as columns.
    pub fn complement_basis(&self) -> DMatrix<f64> {
        complement(&self.basis)
    }

    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.basis * (self.basis.transpose() * x)
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        (x - self.project(x)).amax() <= tol
    }

    /// Largest deviation of `basisᵀ basis` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let k = self.dim();
        (self.basis.transpose() * &self.basis - DMatrix::<f64>::identity(k, k)).amax()
    }

    pub fn intersect_kernel(&self, rows: &DMatrix<f64>) -> Subspace {
        if rows.nrows() == 0 || self.dim() == 0 {
            return self.clone();
        }
        let restricted = rows * &self.basis;
        let k = kernel_basis(&restricted, self.dim());
        Subspace {
            basis: &self.basis * k,
            ambient_dim: self.ambient_dim,
        }
    }
}

/// Joint kernel of a list of functionals in `ℝ^dim`.
pub fn nullspace(rows: &[Functional], dim: usize) -> Subspace {
    if rows.is_empty() {
        return Subspace::full(dim);
    }
    let m = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i].coefficients[j]);
    Subspace::kernel_of_rows(&m, dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::NormTag;

    fn f(xs: &[f64]) -> Functional {
        Functional::new(DVector::from_vec(xs.to_vec()), NormTag::L2)
    }

    #[test]
    fn kernels() {
        let s = nullspace(&[f(&[1.0, 0.0, 0.0])], 3);
        assert_eq!(s.dim(), 2);
        assert!(s.contains(&DVector::from_vec(vec![0.0, 1.0, 1.0]), 1e-12));
        assert_eq!(nullspace(&[], 3).dim(), 3);
        let s = nullspace(&[f(&[1.0, 1.0, 0.0]), f(&[1.0, -1.0, 0.0])], 3);
        assert_eq!(s.dim(), 1);
        assert!(s.orthonormality_error() < 1e-10);
    }
}
