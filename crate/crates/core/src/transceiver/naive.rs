use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    finish_wiener, finish_zero_forcing, ChannelRealization, DesignParams, PowerBudget, ReceiverForm, RelayDesign,
    Scheme, SystemDims, WienerParts,
};
use crate::error::{RelayError, Result};
use crate::matcore::{gram, hpd_inverse, identity, real_diagonal, ComplexMatrix};

/// Scalar relay gain `δ` in `Q = δ I`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NaiveGain {
    /// `δ² = P_R / Tr(ρ H Hᴴ + I)`: meets the relay budget on every draw.
    #[default]
    Variable,
    /// Constant `δ`, independent of the draw.
    Fixed(f64),
}

impl NaiveGain {
    pub fn delta(&self, h: &ComplexMatrix, pw: PowerBudget) -> f64 {
        match *self {
            NaiveGain::Variable => {
                let energy: f64 = h.iter().map(|z| z.norm_sqr()).sum();
                (pw.p_r / (pw.rho * energy + h.nrows() as f64)).sqrt()
            }
            NaiveGain::Fixed(c) => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NaiveEqualizer {
    #[default]
    Mmse,
    Zf,
}

/// Which error covariance feeds the output SNRs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NaiveCovariance {
    /// Exact covariance with the relay noise amplification included.
    #[default]
    Exact,
    /// Drops the forwarded relay noise: `(δ² HᴴGᴴGH + ρ⁻¹I)⁻¹` for MMSE and
    /// `(δ² HᴴGᴴGH)⁻¹` for ZF. Only meaningful as a high-gain approximation.
    RayleighProduct,
}

/// Amplify-and-forward relay `Q = δ I` with a linear equalizer at the destination.
pub fn design_naive_relay(
    ch: &ChannelRealization,
    pw: PowerBudget,
    dims: SystemDims,
    equalizer: NaiveEqualizer,
) -> Result<RelayDesign> {
    design_naive_relay_with(ch, pw, dims, equalizer, NaiveGain::default(), NaiveCovariance::default())
}

pub fn design_naive_relay_with(
    ch: &ChannelRealization,
    pw: PowerBudget,
    dims: SystemDims,
    equalizer: NaiveEqualizer,
    gain: NaiveGain,
    covariance: NaiveCovariance,
) -> Result<RelayDesign> {
    if ch.dims() != dims {
        return Err(RelayError::InvalidDims(format!("channel is {} but dims are {dims}", ch.dims())));
    }
    if equalizer == NaiveEqualizer::Zf {
        dims.require_zf()?;
    }
    let delta = gain.delta(&ch.h, pw);
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(RelayError::OutOfRange(format!("relay gain must be positive and finite, got {delta}")));
    }
    let q = identity(dims.n_r()) * Complex64::new(delta, 0.0);

    let (scheme, receiver) = match equalizer {
        NaiveEqualizer::Mmse => (Scheme::NaiveMmse, ReceiverForm::Direct),
        NaiveEqualizer::Zf => (Scheme::NaiveZf, ReceiverForm::Whitened),
    };
    let mut parts = match equalizer {
        NaiveEqualizer::Mmse => finish_wiener(ch, q, pw.rho)?,
        NaiveEqualizer::Zf => finish_zero_forcing(ch, q, pw.rho)?,
    };
    if covariance == NaiveCovariance::RayleighProduct {
        approximate(&mut parts, ch, delta, pw.rho, equalizer)?;
    }

    Ok(RelayDesign {
        scheme,
        q: parts.q,
        noise: parts.noise,
        w: Some(parts.w),
        receiver,
        r_e: Some(parts.r_e),
        tau: Some(parts.tau),
        mi: None,
        mi_closed_form: None,
        params: DesignParams { phi_sq: Vec::new(), level: delta },
    })
}

fn approximate(
    parts: &mut WienerParts,
    ch: &ChannelRealization,
    delta: f64,
    rho: f64,
    equalizer: NaiveEqualizer,
) -> Result<()> {
    let gh = &ch.g * &ch.h;
    let n_s = ch.h.ncols();
    let info = gram(&gh) * Complex64::new(delta * delta, 0.0);
    parts.r_e = match equalizer {
        NaiveEqualizer::Mmse => {
            hpd_inverse(&(info + identity(n_s) * Complex64::new(1.0 / rho, 0.0)), "approximate error covariance")?
        }
        NaiveEqualizer::Zf => hpd_inverse(&info, "approximate error covariance")?,
    };
    let offset = if equalizer == NaiveEqualizer::Mmse { 1.0 } else { 0.0 };
    parts.tau = real_diagonal(&parts.r_e).iter().map(|e| (rho / e - offset).max(0.0)).collect();
    Ok(())
}
