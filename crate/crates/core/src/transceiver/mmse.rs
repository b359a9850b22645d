use num_complex::Complex64;

use super::waterfill::{mmse_waterfill, WaterfillRule};
use super::{finish_wiener, ChannelRealization, DesignParams, PowerBudget, ReceiverForm, RelayDesign, Scheme, SystemDims};
use crate::error::{RelayError, Result};
use crate::matcore::{diag, hpd_inverse, identity, leading_columns, ComplexMatrix};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MmseOptions {
    pub waterfill: WaterfillRule,
}

/// Joint MMSE relay matrix and Wiener equalizer.
///
/// The relay first applies the first-hop Wiener receiver
/// `L = (HᴴH + ρ⁻¹I)⁻¹Hᴴ`, then `B = Ũ_g Φ̂ Ũ_hᴴ` with `Φ̂` from
/// [`mmse_waterfill`]. Valid for every antenna configuration, including
/// `N_S > N_R`.
pub fn design_mmse_relay(ch: &ChannelRealization, pw: PowerBudget, dims: SystemDims) -> Result<RelayDesign> {
    design_mmse_relay_with(ch, pw, dims, MmseOptions::default())
}

pub fn design_mmse_relay_with(
    ch: &ChannelRealization,
    pw: PowerBudget,
    dims: SystemDims,
    opts: MmseOptions,
) -> Result<RelayDesign> {
    check_dims(ch, dims)?;
    let rho = pw.rho;
    let m = dims.m();

    let first_hop_error = first_hop_error(ch, rho)?;
    let l = &first_hop_error * ch.h.adjoint();

    let lambda_y = lambda_y(ch, rho, m);
    let lambda_g = &ch.eig_g.values[..m];
    let wf = mmse_waterfill(&lambda_y, lambda_g, pw.p_r, opts.waterfill);
    let phi: Vec<f64> = wf.phi_sq.iter().map(|p| p.max(0.0).sqrt()).collect();

    let b = optimal_b(ch, &phi);
    let q = b * l;
    let parts = finish_wiener(ch, q, rho)?;
    Ok(RelayDesign {
        scheme: Scheme::MmseTx,
        q: parts.q,
        noise: parts.noise,
        w: Some(parts.w),
        receiver: ReceiverForm::Direct,
        r_e: Some(parts.r_e),
        tau: Some(parts.tau),
        mi: None,
        mi_closed_form: None,
        params: DesignParams { phi_sq: wf.phi_sq, level: wf.nu },
    })
}

/// Error covariance by the two-term decomposition
/// `(HᴴH + ρ⁻¹I)⁻¹ + Ũ_h (Ũ_hᴴ Bᴴ GᴴG B Ũ_h + Λ̃_y⁻¹)⁻¹ Ũ_hᴴ`
/// for an `N_R x N_S` matrix `B` applied after the first-hop Wiener receiver.
pub fn mmse_ecd_covariance(
    ch: &ChannelRealization,
    pw: PowerBudget,
    dims: SystemDims,
    b: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_dims(ch, dims)?;
    expect_shape(b, dims.n_r(), dims.n_s())?;
    let u_h = leading_columns(&ch.eig_h.vectors, dims.m());
    ecd_from_reduced(ch, pw.rho, &(b * u_h))
}

/// Same as [`mmse_ecd_covariance`] but takes the `N_R x M` product `B Ũ_h`
/// directly; components of `B` along the null space of `R_y` never matter.
pub fn mmse_ecd_covariance_reduced(
    ch: &ChannelRealization,
    pw: PowerBudget,
    dims: SystemDims,
    b_u: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_dims(ch, dims)?;
    expect_shape(b_u, dims.n_r(), dims.m())?;
    ecd_from_reduced(ch, pw.rho, b_u)
}

fn ecd_from_reduced(ch: &ChannelRealization, rho: f64, b_u: &ComplexMatrix) -> Result<ComplexMatrix> {
    let m = b_u.ncols();
    let u_h = leading_columns(&ch.eig_h.vectors, m);
    let gb = &ch.g * b_u;
    let inv_lambda_y: Vec<f64> = lambda_y(ch, rho, m).iter().map(|v| 1.0 / v).collect();
    let second = hpd_inverse(&(gb.adjoint() * &gb + diag(&inv_lambda_y)), "second-hop error covariance")?;
    Ok(first_hop_error(ch, rho)? + &u_h * second * u_h.adjoint())
}

fn expect_shape(b: &ComplexMatrix, rows: usize, cols: usize) -> Result<()> {
    if b.shape() != (rows, cols) {
        return Err(RelayError::InvalidDims(format!(
            "B must be {rows}x{cols}, got {}x{}",
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

/// `B̂ = Ũ_g diag(φ) Ũ_hᴴ`.
pub(super) fn optimal_b(ch: &ChannelRealization, phi: &[f64]) -> ComplexMatrix {
    let m = phi.len();
    let u_g = leading_columns(&ch.eig_g.vectors, m);
    let u_h = leading_columns(&ch.eig_h.vectors, m);
    u_g * diag(phi) * u_h.adjoint()
}

/// `(HᴴH + ρ⁻¹I)⁻¹`, the first-hop MMSE error covariance.
fn first_hop_error(ch: &ChannelRealization, rho: f64) -> Result<ComplexMatrix> {
    let n_s = ch.h.ncols();
    let a = ch.h.adjoint() * &ch.h + identity(n_s) * Complex64::new(1.0 / rho, 0.0);
    hpd_inverse(&a, "first-hop error covariance")
}

/// Leading eigenvalues of `R_y = ρI − (HᴴH + ρ⁻¹I)⁻¹`: `ρ² λ_h / (1 + ρ λ_h)`.
pub(super) fn lambda_y(ch: &ChannelRealization, rho: f64, m: usize) -> Vec<f64> {
    ch.eig_h.values[..m].iter().map(|&lh| rho * rho * lh / (1.0 + rho * lh)).collect()
}

fn check_dims(ch: &ChannelRealization, dims: SystemDims) -> Result<()> {
    if ch.dims() != dims {
        return Err(RelayError::InvalidDims(format!("channel is {} but dims are {dims}", ch.dims())));
    }
    Ok(())
}
