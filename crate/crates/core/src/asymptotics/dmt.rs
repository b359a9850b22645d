use super::check_gain;
use crate::error::{RelayError, Result};
use crate::transceiver::{Scheme, SystemDims};

/// Cut-set DMT `(N_R − 2r)(min(N_S, N_D) − 2r)` for `0 <= r <= N/2`.
pub fn dmt_optimal(dims: SystemDims, r: f64) -> Result<f64> {
    check_gain(r)?;
    let half = dims.n() as f64 / 2.0;
    if r > half {
        return Err(RelayError::OutOfRange(format!("r = {r} exceeds N/2 = {half} for {dims}")));
    }
    let a = dims.n_r() as f64 - 2.0 * r;
    let b = dims.n_s().min(dims.n_d()) as f64 - 2.0 * r;
    Ok((a * b).max(0.0))
}

/// DMT of the MMSE and ZF transceivers: `(N_R − N_S + 1)(1 − 2r/N_S)⁺` when
/// `N_S <= min(N_R, N_D)`, zero otherwise.
pub fn dmt_linear_tx(dims: SystemDims, r: f64) -> Result<f64> {
    check_gain(r)?;
    if !dims.supports_zf() {
        return Ok(0.0);
    }
    let ns = dims.n_s() as f64;
    Ok((dims.n_r() as f64 - ns + 1.0) * (1.0 - 2.0 * r / ns).max(0.0))
}

/// Linear-transceiver DMT together with whether the value may be quoted at `r = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearDmt {
    pub value: f64,
    /// With joint encoding the MMSE result only holds for `r > 0`.
    pub valid_at_r0: bool,
}

impl LinearDmt {
    /// True when `value` is backed at this `r`.
    pub fn is_valid_at(&self, r: f64) -> bool {
        r > 0.0 || self.valid_at_r0
    }
}

pub fn dmt_linear_tx_report(dims: SystemDims, r: f64, scheme: Scheme) -> Result<LinearDmt> {
    Ok(LinearDmt { value: dmt_linear_tx(dims, r)?, valid_at_r0: scheme.is_zero_forcing() })
}

/// Naive relaying DMT `(min(N_R, N_D) − N_S + 1)⁺ (1 − 2r/N_S)⁺`.
pub fn dmt_naive(dims: SystemDims, r: f64) -> Result<f64> {
    check_gain(r)?;
    let ns = dims.n_s() as f64;
    let gain = (dims.l() as f64 - ns + 1.0).max(0.0);
    Ok(gain * (1.0 - 2.0 * r / ns).max(0.0))
}
