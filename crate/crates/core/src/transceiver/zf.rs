use super::{
    finish_zero_forcing, ChannelRealization, DesignParams, PowerBudget, ReceiverForm, RelayDesign, Scheme, SystemDims,
};
use crate::error::{RelayError, Result};
use crate::matcore::{diag, gram, hpd_inverse, leading_columns, real_trace, ComplexMatrix};

/// Which `U_h` column is paired with the `k`-th strongest second-hop mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZfPairing {
    /// `R_z` eigenvalues sorted descending and matched to descending `λ_g`:
    /// the weakest first-hop mode rides the strongest second-hop mode.
    #[default]
    SortedDescending,
    /// Column `k` of `U_h` matched to `λ_{g,k}` without re-sorting.
    ColumnOrder,
}

/// Zero-forcing relay matrix and equalizer.
///
/// Needs `N_S <= min(N_R, N_D)`. The relay applies the first-hop ZF receiver
/// `L_z = (HᴴH)⁻¹Hᴴ`, then `B = Ũ_g Φ̂ Π U_hᴴ` where `Π` realises the
/// pairing, and `|φ̂_k|² = √μ / √(λ_{z,k} λ_{g,k})`.
pub fn design_zf_relay(ch: &ChannelRealization, pw: PowerBudget, dims: SystemDims) -> Result<RelayDesign> {
    design_zf_relay_with(ch, pw, dims, ZfPairing::default())
}

pub fn design_zf_relay_with(
    ch: &ChannelRealization,
    pw: PowerBudget,
    dims: SystemDims,
    pairing: ZfPairing,
) -> Result<RelayDesign> {
    dims.require_zf()?;
    if ch.dims() != dims {
        return Err(RelayError::InvalidDims(format!("channel is {} but dims are {dims}", ch.dims())));
    }
    let rho = pw.rho;
    let n_s = dims.n_s();

    let hh_inv = hpd_inverse(&gram(&ch.h), "first-hop Gram matrix")?;
    let l_z = &hh_inv * ch.h.adjoint();

    // R_z = ρI + (HᴴH)⁻¹ has eigenvalue ρ + 1/λ_{h,k} on column k of U_h.
    let lambda_z: Vec<f64> = ch.eig_h.values.iter().map(|&lh| rho + 1.0 / lh).collect();
    let columns = paired_columns(&lambda_z, pairing);
    let lambda_g = &ch.eig_g.values[..n_s];

    let root_sum: f64 = (0..n_s).map(|k| (lambda_z[columns[k]] / lambda_g[k]).sqrt()).sum();
    let sqrt_mu = pw.p_r / root_sum;
    let phi_sq: Vec<f64> = (0..n_s).map(|k| sqrt_mu / (lambda_z[columns[k]] * lambda_g[k]).sqrt()).collect();
    let phi: Vec<f64> = phi_sq.iter().map(|p| p.sqrt()).collect();

    let mut u_h = ComplexMatrix::zeros(n_s, n_s);
    for (k, &c) in columns.iter().enumerate() {
        u_h.set_column(k, &ch.eig_h.vectors.column(c));
    }
    let b = leading_columns(&ch.eig_g.vectors, n_s) * diag(&phi) * u_h.adjoint();
    let q = &b * l_z;

    let parts = finish_zero_forcing(ch, q, rho)?;
    Ok(RelayDesign {
        scheme: Scheme::ZfTx,
        q: parts.q,
        noise: parts.noise,
        w: Some(parts.w),
        receiver: ReceiverForm::Whitened,
        r_e: Some(parts.r_e),
        tau: Some(parts.tau),
        mi: None,
        mi_closed_form: None,
        params: DesignParams { phi_sq, level: sqrt_mu },
    })
}

/// `(HᴴH)⁻¹ + (Bᴴ GᴴG B)⁻¹` with `B = Q H`; equals the ZF error covariance.
pub fn zf_decomposed_covariance(ch: &ChannelRealization, q: &ComplexMatrix) -> Result<ComplexMatrix> {
    let b = q * &ch.h;
    let gb = &ch.g * &b;
    Ok(hpd_inverse(&gram(&ch.h), "first-hop Gram matrix")? + hpd_inverse(&gram(&gb), "second-hop Gram matrix")?)
}

fn paired_columns(lambda_z: &[f64], pairing: ZfPairing) -> Vec<usize> {
    let mut columns: Vec<usize> = (0..lambda_z.len()).collect();
    if pairing == ZfPairing::SortedDescending {
        columns.sort_by(|&i, &j| lambda_z[j].total_cmp(&lambda_z[i]));
    }
    columns
}

/// Total MSE of both pairings on one draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingAudit {
    pub sorted_mse: f64,
    pub column_order_mse: f64,
}

impl PairingAudit {
    /// True when the implemented (sorted) pairing is no worse, up to `slack`.
    pub fn sorted_is_no_worse(&self, slack: f64) -> bool {
        self.sorted_mse <= self.column_order_mse * (1.0 + slack)
    }
}

pub fn zf_pairing_audit(ch: &ChannelRealization, pw: PowerBudget, dims: SystemDims) -> Result<PairingAudit> {
    let sorted = design_zf_relay_with(ch, pw, dims, ZfPairing::SortedDescending)?;
    let column = design_zf_relay_with(ch, pw, dims, ZfPairing::ColumnOrder)?;
    let mse = |d: &RelayDesign| d.r_e.as_ref().map(real_trace).unwrap_or(f64::NAN);
    Ok(PairingAudit { sorted_mse: mse(&sorted), column_order_mse: mse(&column) })
}
