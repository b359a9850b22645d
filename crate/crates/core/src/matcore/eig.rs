use nalgebra::SymmetricEigen;

use super::{frobenius, ComplexMatrix, HERMITIAN_TOL};
use crate::error::{RelayError, Result};

/// Eigenpairs of a Hermitian matrix, eigenvalues in descending order.
///
/// Column `k` of `vectors` is paired with `values[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `U diag(λ) Uᴴ`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        super::reconstruct(&self.vectors, &self.values)
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted in descending order.
///
/// The input must be Hermitian to a relative tolerance of 1e-10 in Frobenius
/// norm. Ties keep the order produced by the underlying solver (stable sort).
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<Eigensystem> {
    let (rows, cols) = a.shape();
    if rows != cols {
        return Err(RelayError::NotSquare { rows, cols });
    }
    let scale = frobenius(a).max(1.0);
    let asymmetry = frobenius(&(a - a.adjoint())) / scale;
    if !(asymmetry <= HERMITIAN_TOL) {
        return Err(RelayError::NonHermitianInput { asymmetry });
    }
    if rows == 0 {
        return Ok(Eigensystem { values: Vec::new(), vectors: a.clone() });
    }

    let eig = SymmetricEigen::new(super::hermitian_part(a));
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(rows, rows);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(Eigensystem { values, vectors })
}
