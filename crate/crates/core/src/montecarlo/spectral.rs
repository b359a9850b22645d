//! Per-trial metrics computed from the channel eigensystems alone.
//!
//! For the MMSE and ZF transceivers both error-covariance terms are diagonal
//! in the `U_h` basis, so `[R_e]_kk = Σ_j |U_h[k, j]|² d_j` with one scalar
//! `d_j` per eigenmode. This skips forming `Q`, `W` and every matrix inverse.

use crate::error::{RelayError, Result};
use crate::matcore::{gram, hermitian_eig, ComplexMatrix, MAX_CONDITION};
use crate::transceiver::{mmse_waterfill, PowerBudget, SystemDims, WaterfillRule};

pub(crate) struct Spectra {
    lambda_h: Vec<f64>,
    u_h: ComplexMatrix,
    lambda_g: Vec<f64>,
}

impl Spectra {
    pub(crate) fn new(h: &ComplexMatrix, g: &ComplexMatrix) -> Result<Self> {
        let eh = hermitian_eig(&gram(h))?;
        let mut lambda_g: Vec<f64> = gram(g).symmetric_eigenvalues().iter().copied().collect();
        lambda_g.sort_by(|a, b| b.total_cmp(a));
        Ok(Self {
            lambda_h: clamp_rank(eh.values, h.nrows().min(h.ncols())),
            u_h: eh.vectors,
            lambda_g: clamp_rank(lambda_g, g.nrows().min(g.ncols())),
        })
    }

    fn diagonal(&self, d: &[f64]) -> Vec<f64> {
        let n = self.u_h.nrows();
        (0..n).map(|k| (0..n).map(|j| self.u_h[(k, j)].norm_sqr() * d[j]).sum()).collect()
    }
}

fn clamp_rank(mut v: Vec<f64>, rank: usize) -> Vec<f64> {
    for (k, x) in v.iter_mut().enumerate() {
        if k >= rank || *x < 0.0 {
            *x = 0.0;
        }
    }
    v
}

/// Output SNRs of the MMSE transceiver.
pub(crate) fn mmse_tau(s: &Spectra, pw: PowerBudget, dims: SystemDims) -> Vec<f64> {
    let rho = pw.rho;
    let m = dims.m();
    let lambda_y: Vec<f64> = s.lambda_h[..m].iter().map(|&l| rho * rho * l / (1.0 + rho * l)).collect();
    let wf = mmse_waterfill(&lambda_y, &s.lambda_g[..m], pw.p_r, WaterfillRule::Clamped);
    let d: Vec<f64> = (0..dims.n_s())
        .map(|j| {
            if j < m && lambda_y[j] > 0.0 {
                1.0 / (s.lambda_h[j] + 1.0 / rho) + 1.0 / (wf.phi_sq[j] * s.lambda_g[j] + 1.0 / lambda_y[j])
            } else {
                rho
            }
        })
        .collect();
    s.diagonal(&d).iter().map(|e| (rho / e - 1.0).max(0.0)).collect()
}

/// Output SNRs of the ZF transceiver (weakest first-hop mode on the strongest
/// second-hop mode).
pub(crate) fn zf_tau(s: &Spectra, pw: PowerBudget, dims: SystemDims) -> Result<Vec<f64>> {
    let rho = pw.rho;
    let n_s = dims.n_s();
    check_condition(&s.lambda_h[..n_s], "first-hop Gram matrix")?;
    check_condition(&s.lambda_g[..n_s], "second-hop Gram matrix")?;
    // λ_z = ρ + 1/λ_h is largest on the last U_h column.
    let lambda_z = |c: usize| rho + 1.0 / s.lambda_h[c];
    let column = |k: usize| n_s - 1 - k;
    let root_sum: f64 = (0..n_s).map(|k| (lambda_z(column(k)) / s.lambda_g[k]).sqrt()).sum();
    let sqrt_mu = pw.p_r / root_sum;
    let mut d = vec![0.0; n_s];
    for k in 0..n_s {
        let c = column(k);
        let phi_sq = sqrt_mu / (lambda_z(c) * s.lambda_g[k]).sqrt();
        d[c] = 1.0 / s.lambda_h[c] + 1.0 / (phi_sq * s.lambda_g[k]);
    }
    Ok(s.diagonal(&d).iter().map(|e| rho / e).collect())
}

/// Mutual information of the equal-power benchmark relay, in bits.
pub(crate) fn optimal_mi(s: &Spectra, pw: PowerBudget, dims: SystemDims) -> f64 {
    let m = dims.m();
    let x_sq = pw.rho.min(pw.p_r / m as f64);
    0.5 * (0..m)
        .map(|k| {
            let a = pw.rho * s.lambda_h[k];
            let b = x_sq * s.lambda_g[k];
            ((1.0 + a) * (1.0 + b) / (1.0 + a + b)).log2()
        })
        .sum::<f64>()
}

fn check_condition(values: &[f64], what: &'static str) -> Result<()> {
    let max = values.first().copied().unwrap_or(0.0);
    let min = values.last().copied().unwrap_or(0.0);
    if !(min > 0.0) || max / min > MAX_CONDITION {
        return Err(RelayError::SingularSystem { what, condition: if min > 0.0 { max / min } else { f64::INFINITY } });
    }
    Ok(())
}
