//! Closed-form diversity-multiplexing and diversity-rate tradeoffs, plus the
//! eigenvalue exponent of the Rayleigh product channel `GH` with a brute-force
//! infimum search used to cross-check the naive-scheme DRT.

mod dmt;
mod drt;
mod rayleigh;

pub use dmt::{dmt_linear_tx, dmt_linear_tx_report, dmt_naive, dmt_optimal, LinearDmt};
pub use drt::{d_me, d_n_me, drt_mmse_tx, drt_naive, DrtBounds};
pub use rayleigh::{drt_infimum_oracle, rayleigh_exponent, ExponentVector};

use serde::{Deserialize, Serialize};

use crate::error::{RelayError, Result};
use crate::transceiver::SystemDims;

/// A tradeoff evaluation point: multiplexing gain `r` (DMT) or fixed rate `R`
/// in b/s/Hz (DRT).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TradeoffQuery {
    Dmt { dims: SystemDims, r: f64 },
    Drt { dims: SystemDims, rate: f64 },
}

impl TradeoffQuery {
    pub fn dmt(dims: SystemDims, r: f64) -> Result<Self> {
        check_gain(r)?;
        Ok(TradeoffQuery::Dmt { dims, r })
    }

    pub fn drt(dims: SystemDims, rate: f64) -> Result<Self> {
        check_rate(rate)?;
        Ok(TradeoffQuery::Drt { dims, rate })
    }

    pub fn dims(&self) -> SystemDims {
        match *self {
            TradeoffQuery::Dmt { dims, .. } | TradeoffQuery::Drt { dims, .. } => dims,
        }
    }
}

pub(crate) fn check_gain(r: f64) -> Result<()> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(RelayError::OutOfRange(format!("multiplexing gain must be finite and >= 0, got {r}")))
    }
}

pub(crate) fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 {
        Ok(())
    } else {
        Err(RelayError::OutOfRange(format!("rate must be finite and > 0, got {rate}")))
    }
}
