//! Small dense complex linear algebra: Gram matrices, Hermitian
//! eigendecomposition in descending order, guarded inverses of Hermitian
//! positive definite matrices, and reproducible channel sampling.
//!
//! Everything here works on matrices of dimension at most ~16, so clarity wins
//! over blocking or in-place tricks.

mod eig;
mod rng;

pub use eig::{hermitian_eig, Eigensystem};
pub use rng::{sample_channel, SeededRng};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{RelayError, Result};

/// Dense complex matrix used for channels, relay matrices and covariances.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Inverses whose condition number exceeds this are reported as singular.
pub const MAX_CONDITION: f64 = 1e14;

/// Relative asymmetry tolerated by [`hermitian_eig`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Forms `HᴴH`.
pub fn gram(h: &ComplexMatrix) -> ComplexMatrix {
    h.adjoint() * h
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Builds `U diag(d) Uᴴ`.
pub fn reconstruct(u: &ComplexMatrix, d: &[f64]) -> ComplexMatrix {
    let mut scaled = u.clone();
    for (j, &dj) in d.iter().enumerate() {
        scaled.column_mut(j).scale_mut(dj);
    }
    scaled * u.adjoint()
}

/// Real diagonal as a complex matrix.
pub fn diag(d: &[f64]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(d.len(), d.len());
    for (k, &v) in d.iter().enumerate() {
        out[(k, k)] = Complex64::new(v, 0.0);
    }
    out
}

/// Leading `k` columns of `u`.
pub fn leading_columns(u: &ComplexMatrix, k: usize) -> ComplexMatrix {
    u.columns(0, k).into_owned()
}

/// `(A + Aᴴ)/2`, used to scrub round-off before eigen-analysis.
pub fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn frobenius(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Real parts of the diagonal.
pub fn real_diagonal(a: &ComplexMatrix) -> Vec<f64> {
    (0..a.nrows().min(a.ncols())).map(|k| a[(k, k)].re).collect()
}

pub fn real_trace(a: &ComplexMatrix) -> f64 {
    real_diagonal(a).iter().sum()
}

pub fn is_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    let es = hermitian_eig(&hermitian_part(a))?;
    Ok(es.values.last().copied().unwrap_or(0.0))
}

fn checked_spectrum(a: &ComplexMatrix, what: &'static str) -> Result<Eigensystem> {
    let es = hermitian_eig(&hermitian_part(a))?;
    let max = es.values.first().copied().unwrap_or(0.0);
    let min = es.values.last().copied().unwrap_or(0.0);
    if !(min > 0.0) || !max.is_finite() {
        return Err(RelayError::SingularSystem { what, condition: f64::INFINITY });
    }
    let condition = max / min;
    if condition > MAX_CONDITION {
        return Err(RelayError::SingularSystem { what, condition });
    }
    Ok(es)
}

/// Inverse of a Hermitian positive definite matrix.
///
/// Fails with [`RelayError::SingularSystem`] when the spectrum is not strictly
/// positive or the condition number exceeds [`MAX_CONDITION`].
pub fn hpd_inverse(a: &ComplexMatrix, what: &'static str) -> Result<ComplexMatrix> {
    let es = checked_spectrum(a, what)?;
    let inv: Vec<f64> = es.values.iter().map(|v| 1.0 / v).collect();
    Ok(reconstruct(&es.vectors, &inv))
}

/// `A^{-1/2}` for Hermitian positive definite `A`.
pub fn hpd_inv_sqrt(a: &ComplexMatrix, what: &'static str) -> Result<ComplexMatrix> {
    let es = checked_spectrum(a, what)?;
    let d: Vec<f64> = es.values.iter().map(|v| 1.0 / v.sqrt()).collect();
    Ok(reconstruct(&es.vectors, &d))
}

/// `log2 det A` for Hermitian positive definite `A`.
pub fn log2_det_hpd(a: &ComplexMatrix, what: &'static str) -> Result<f64> {
    let es = checked_spectrum(a, what)?;
    Ok(es.values.iter().map(|v| v.log2()).sum())
}
