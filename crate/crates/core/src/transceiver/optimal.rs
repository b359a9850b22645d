use super::{end_to_end_mi, ChannelRealization, DesignParams, NoiseWhitening, PowerBudget, ReceiverForm, RelayDesign, Scheme, SystemDims};
use crate::error::{RelayError, Result};
use crate::matcore::{leading_columns, ComplexMatrix};

/// Capacity-achieving relay structure with equal power per mode, used as a
/// benchmark rather than a linear-receiver scheme.
///
/// `Q = x Ũ_g (I + ρΛ̃_h)^{-1/2} Ṽ_hᴴ` with `ṽ_k = H ũ_{h,k} / √λ_{h,k}` and
/// `x² = min(ρ, P_R / M)`, so the relay spends `M x² <= P_R`. The design stores
/// the exact mutual information (bits, half-duplex pre-log) and the per-mode
/// closed form `½ Σ log2((1+ρλ_h)(1+x²λ_g) / (1+ρλ_h+x²λ_g))`.
pub fn optimal_mi_lower_bound(ch: &ChannelRealization, pw: PowerBudget, dims: SystemDims) -> Result<RelayDesign> {
    if ch.dims() != dims {
        return Err(RelayError::InvalidDims(format!("channel is {} but dims are {dims}", ch.dims())));
    }
    let rho = pw.rho;
    let m = dims.m();
    let x_sq = rho.min(pw.p_r / m as f64);
    let x = x_sq.sqrt();

    let u_h = leading_columns(&ch.eig_h.vectors, m);
    let mut right = &ch.h * &u_h; // columns H ũ_k, later scaled to ṽ_k / √(1+ρλ_h)
    for k in 0..m {
        let lh = ch.eig_h.values[k];
        let scale = if lh > 0.0 { x / (lh * (1.0 + rho * lh)).sqrt() } else { 0.0 };
        right.column_mut(k).scale_mut(scale);
    }
    let q: ComplexMatrix = leading_columns(&ch.eig_g.vectors, m) * right.adjoint();

    let closed: f64 = (0..m)
        .map(|k| {
            let a = rho * ch.eig_h.values[k];
            let b = x_sq * ch.eig_g.values[k];
            ((1.0 + a) * (1.0 + b) / (1.0 + a + b)).log2()
        })
        .sum::<f64>()
        * 0.5;
    let mi = end_to_end_mi(ch, &q, rho)?;

    Ok(RelayDesign {
        scheme: Scheme::OptimalLb,
        noise: NoiseWhitening::new(&ch.g, &q),
        q,
        w: None,
        receiver: ReceiverForm::Direct,
        r_e: None,
        tau: None,
        mi: Some(mi),
        mi_closed_form: Some(closed),
        params: DesignParams { phi_sq: vec![x_sq; m], level: x },
    })
}
