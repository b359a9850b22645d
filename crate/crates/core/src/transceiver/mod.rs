//! Relay matrix and destination equalizer construction for one channel draw.
//!
//! Signal model: `y_D = G Q (H x + n_R) + n_D` with `H` of size `N_R x N_S`,
//! `G` of size `N_D x N_R`, `E[x xᴴ] = ρ I` and unit-power noise at both hops.
//! The relay obeys `Tr(Q (ρ H Hᴴ + I) Qᴴ) <= P_R`.

mod mmse;
mod naive;
mod optimal;
mod waterfill;
mod zf;

pub use mmse::{design_mmse_relay, design_mmse_relay_with, mmse_ecd_covariance, mmse_ecd_covariance_reduced, MmseOptions};
pub use naive::{design_naive_relay, design_naive_relay_with, NaiveCovariance, NaiveEqualizer, NaiveGain};
pub use optimal::optimal_mi_lower_bound;
pub use waterfill::{mmse_waterfill, Waterfill, WaterfillRule};
pub use zf::{
    design_zf_relay, design_zf_relay_with, zf_decomposed_covariance, zf_pairing_audit, PairingAudit, ZfPairing,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{RelayError, Result};
use crate::matcore::{
    self, gram, hermitian_eig, hpd_inv_sqrt, hpd_inverse, identity, log2_det_hpd, real_diagonal, ComplexMatrix,
    Eigensystem,
};

/// Antenna counts at source, relay and destination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[usize; 3]", into = "[usize; 3]")]
pub struct SystemDims {
    n_s: usize,
    n_r: usize,
    n_d: usize,
}

impl SystemDims {
    pub fn new(n_s: usize, n_r: usize, n_d: usize) -> Result<Self> {
        if n_s == 0 || n_r == 0 || n_d == 0 {
            return Err(RelayError::InvalidDims(format!(
                "antenna counts must be at least 1, got {n_s}x{n_r}x{n_d}"
            )));
        }
        Ok(Self { n_s, n_r, n_d })
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_d(&self) -> usize {
        self.n_d
    }

    /// `min(N_S, N_R)`, the rank of the first hop.
    pub fn m(&self) -> usize {
        self.n_s.min(self.n_r)
    }

    /// `min(N_S, N_R, N_D)`.
    pub fn n(&self) -> usize {
        self.m().min(self.n_d)
    }

    /// `min(N_R, N_D)`, the rank of the second hop.
    pub fn l(&self) -> usize {
        self.n_r.min(self.n_d)
    }

    /// Zero-forcing needs `N_S <= min(N_R, N_D)`.
    pub fn supports_zf(&self) -> bool {
        self.n_s <= self.l()
    }

    pub fn require_zf(&self) -> Result<()> {
        if self.supports_zf() {
            Ok(())
        } else {
            Err(RelayError::InvalidDims(format!(
                "zero-forcing requires N_S <= min(N_R, N_D), got {self}"
            )))
        }
    }
}

impl std::fmt::Display for SystemDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.n_s, self.n_r, self.n_d)
    }
}

impl TryFrom<[usize; 3]> for SystemDims {
    type Error = RelayError;

    fn try_from(v: [usize; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<SystemDims> for [usize; 3] {
    fn from(d: SystemDims) -> Self {
        [d.n_s, d.n_r, d.n_d]
    }
}

/// Per-source-antenna power `ρ` and relay budget `P_R` (linear, unit noise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    pub rho: f64,
    pub p_r: f64,
}

impl PowerBudget {
    pub fn new(rho: f64, p_r: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) || !(p_r > 0.0 && p_r.is_finite()) {
            return Err(RelayError::OutOfRange(format!("powers must be positive, got rho={rho}, p_r={p_r}")));
        }
        Ok(Self { rho, p_r })
    }

    /// `P_R = ρ N_S`.
    pub fn standard(rho: f64, dims: SystemDims) -> Result<Self> {
        Self::new(rho, rho * dims.n_s() as f64)
    }
}

/// One draw of both hops with cached eigensystems of `HᴴH` and `GᴴG`.
///
/// Eigenvalues beyond the rank of the corresponding channel are set to exactly
/// zero and tiny negative round-off is clamped.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: ComplexMatrix,
    pub g: ComplexMatrix,
    pub eig_h: Eigensystem,
    pub eig_g: Eigensystem,
}

impl ChannelRealization {
    pub fn new(h: ComplexMatrix, g: ComplexMatrix) -> Result<Self> {
        if g.ncols() != h.nrows() {
            return Err(RelayError::InvalidDims(format!(
                "G has {} columns but H has {} rows",
                g.ncols(),
                h.nrows()
            )));
        }
        let eig_h = gram_eigensystem(&h)?;
        let eig_g = gram_eigensystem(&g)?;
        Ok(Self { h, g, eig_h, eig_g })
    }

    pub fn sample(dims: SystemDims, rng: &mut matcore::SeededRng) -> Result<Self> {
        let h = matcore::sample_channel(dims.n_r(), dims.n_s(), rng);
        let g = matcore::sample_channel(dims.n_d(), dims.n_r(), rng);
        Self::new(h, g)
    }

    pub fn dims(&self) -> SystemDims {
        SystemDims { n_s: self.h.ncols(), n_r: self.h.nrows(), n_d: self.g.nrows() }
    }
}

fn gram_eigensystem(a: &ComplexMatrix) -> Result<Eigensystem> {
    let rank = a.nrows().min(a.ncols());
    let mut es = hermitian_eig(&gram(a))?;
    for (k, v) in es.values.iter_mut().enumerate() {
        if k >= rank || *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(es)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    MmseTx,
    ZfTx,
    NaiveMmse,
    NaiveZf,
    OptimalLb,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [Scheme::MmseTx, Scheme::ZfTx, Scheme::NaiveMmse, Scheme::NaiveZf, Scheme::OptimalLb];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::MmseTx => "mmse_tx",
            Scheme::ZfTx => "zf_tx",
            Scheme::NaiveMmse => "naive_mmse",
            Scheme::NaiveZf => "naive_zf",
            Scheme::OptimalLb => "optimal_lb",
        }
    }

    /// Whether the scheme decouples the streams with a linear equalizer.
    pub fn is_per_stream(&self) -> bool {
        !matches!(self, Scheme::OptimalLb)
    }

    pub fn is_zero_forcing(&self) -> bool {
        matches!(self, Scheme::ZfTx | Scheme::NaiveZf)
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = RelayError;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| RelayError::InvalidConfig(format!("unknown scheme `{s}`")))
    }
}

/// Effective noise covariance `G Q Qᴴ Gᴴ + I` at the destination.
#[derive(Debug, Clone)]
pub struct NoiseWhitening {
    pub r_n: ComplexMatrix,
}

impl NoiseWhitening {
    pub fn new(g: &ComplexMatrix, q: &ComplexMatrix) -> Self {
        let gq = g * q;
        let r_n = &gq * gq.adjoint() + identity(g.nrows());
        Self { r_n }
    }

    pub fn inverse(&self) -> Result<ComplexMatrix> {
        hpd_inverse(&self.r_n, "noise covariance")
    }

    /// `R_n^{-1/2}`.
    pub fn whitener(&self) -> Result<ComplexMatrix> {
        hpd_inv_sqrt(&self.r_n, "noise covariance")
    }
}

/// How the stored equalizer `w` is applied to the destination signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverForm {
    /// `x̂ = W y_D` (Wiener filter).
    Direct,
    /// `x̂ = W R_n^{-1/2} y_D` (zero-forcing on the whitened signal).
    Whitened,
}

/// Scheme-specific intermediates kept for inspection and invariant checks.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignParams {
    /// `|φ̂_k|²` on the diagonal of `Φ̂` (empty for naive schemes).
    pub phi_sq: Vec<f64>,
    /// Water level `ν` (MMSE), `√μ` (ZF), gain `δ` (naive) or `X = x I` amplitude (optimal bound).
    pub level: f64,
}

#[derive(Debug, Clone)]
pub struct RelayDesign {
    pub scheme: Scheme,
    pub q: ComplexMatrix,
    pub noise: NoiseWhitening,
    pub w: Option<ComplexMatrix>,
    pub receiver: ReceiverForm,
    pub r_e: Option<ComplexMatrix>,
    pub tau: Option<Vec<f64>>,
    /// End-to-end mutual information in bits (half-duplex pre-log applied);
    /// only set for [`Scheme::OptimalLb`].
    pub mi: Option<f64>,
    /// Closed-form value of `mi` for the bound construction.
    pub mi_closed_form: Option<f64>,
    pub params: DesignParams,
}

impl RelayDesign {
    /// Matrix applied to `y_D` to form `x̂`.
    pub fn receive_filter(&self) -> Result<Option<ComplexMatrix>> {
        match (&self.w, self.receiver) {
            (None, _) => Ok(None),
            (Some(w), ReceiverForm::Direct) => Ok(Some(w.clone())),
            (Some(w), ReceiverForm::Whitened) => Ok(Some(w * self.noise.whitener()?)),
        }
    }
}

/// Relay transmit power `Tr(Q (ρ H Hᴴ + I) Qᴴ)`.
pub fn relay_power(h: &ComplexMatrix, q: &ComplexMatrix, rho: f64) -> f64 {
    let qh = q * h;
    let signal: f64 = qh.iter().map(|z| z.norm_sqr()).sum();
    let noise: f64 = q.iter().map(|z| z.norm_sqr()).sum();
    rho * signal + noise
}

/// Exact end-to-end mutual information `½ log2 |ρ (GQH)ᴴ R_n⁻¹ GQH + I|` in bits.
pub fn end_to_end_mi(ch: &ChannelRealization, q: &ComplexMatrix, rho: f64) -> Result<f64> {
    let noise = NoiseWhitening::new(&ch.g, q);
    let gqh = &ch.g * q * &ch.h;
    let info = gqh.adjoint() * noise.inverse()? * &gqh;
    let a = info * Complex64::new(rho, 0.0) + identity(ch.h.ncols());
    Ok(0.5 * log2_det_hpd(&a, "mutual information matrix")?)
}

/// `½ Σ log2(1 + τ_i)` in bits.
pub fn stream_mi_joint(design: &RelayDesign) -> Option<f64> {
    design.tau.as_deref().map(joint_mi)
}

pub fn joint_mi(tau: &[f64]) -> f64 {
    0.5 * tau.iter().map(|t| (1.0 + t).log2()).sum::<f64>()
}

/// Wiener receiver, exact error covariance and MMSE output SNRs for a relay matrix.
pub(crate) fn finish_wiener(ch: &ChannelRealization, q: ComplexMatrix, rho: f64) -> Result<WienerParts> {
    let noise = NoiseWhitening::new(&ch.g, &q);
    let gqh = &ch.g * &q * &ch.h;
    let n_s = ch.h.ncols();
    let info = gqh.adjoint() * noise.inverse()? * &gqh;
    let r_e = hpd_inverse(&(info + identity(n_s) * Complex64::new(1.0 / rho, 0.0)), "error covariance")?;

    let rho_c = Complex64::new(rho, 0.0);
    let received = &gqh * gqh.adjoint() * rho_c + &noise.r_n;
    let w = gqh.adjoint() * rho_c * hpd_inverse(&received, "received covariance")?;
    let tau = real_diagonal(&r_e).iter().map(|e| (rho / e - 1.0).max(0.0)).collect();
    Ok(WienerParts { q, noise, w, r_e, tau })
}

/// Zero-forcing receiver on the whitened signal and its error covariance.
pub(crate) fn finish_zero_forcing(ch: &ChannelRealization, q: ComplexMatrix, rho: f64) -> Result<WienerParts> {
    let noise = NoiseWhitening::new(&ch.g, &q);
    let gqh = &ch.g * &q * &ch.h;
    let info = gqh.adjoint() * noise.inverse()? * &gqh;
    let r_e = hpd_inverse(&info, "zero-forcing error covariance")?;
    let w = &r_e * gqh.adjoint() * noise.whitener()?;
    let tau = real_diagonal(&r_e).iter().map(|e| (rho / e).max(0.0)).collect();
    Ok(WienerParts { q, noise, w, r_e, tau })
}

pub(crate) struct WienerParts {
    pub q: ComplexMatrix,
    pub noise: NoiseWhitening,
    pub w: ComplexMatrix,
    pub r_e: ComplexMatrix,
    pub tau: Vec<f64>,
}
