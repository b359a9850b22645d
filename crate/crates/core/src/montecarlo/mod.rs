//! Outage probability estimation over an SNR grid.
//!
//! Trial `t` of grid point `p` draws its channel from the counter stream
//! `p · trials + t`, so every trial is reproducible on its own and the curve is
//! identical for any worker count.

mod engine;
mod slope;
mod spectral;

pub use engine::{estimate_outage, estimate_outage_with, EngineOptions, EvalPath, MAX_RESAMPLES};
pub use slope::{fit_diversity_slope, fit_log_log, SlopeFit, DEFAULT_MIN_COUNT};

use serde::{Deserialize, Serialize};

use crate::error::{RelayError, Result};
use crate::transceiver::{joint_mi, NaiveGain, Scheme, SystemDims};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    /// One codeword across all streams: outage when `½ Σ log2(1 + τ_i) < R`.
    Joint,
    /// Rate `R / N_S` per stream: outage when any stream falls short.
    Separate,
    /// Exact end-to-end mutual information below `R`.
    MiOnly,
}

impl Encoding {
    pub fn name(&self) -> &'static str {
        match self {
            Encoding::Joint => "joint",
            Encoding::Separate => "separate",
            Encoding::MiOnly => "mi_only",
        }
    }
}

impl std::str::FromStr for Encoding {
    type Err = RelayError;

    fn from_str(s: &str) -> Result<Self> {
        [Encoding::Joint, Encoding::Separate, Encoding::MiOnly]
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| RelayError::InvalidConfig(format!("unknown encoding `{s}`")))
    }
}

/// Target rate as a function of `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatePolicy {
    /// Constant `R` in b/s/Hz.
    FixedRate(f64),
    /// `R(ρ) = r log2 ρ`.
    Multiplexing(f64),
}

impl RatePolicy {
    pub fn rate_at(&self, rho: f64) -> f64 {
        match *self {
            RatePolicy::FixedRate(r) => r,
            RatePolicy::Multiplexing(r) => r * rho.log2(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dims: SystemDims,
    pub scheme: Scheme,
    pub encoding: Encoding,
    pub rate_policy: RatePolicy,
    /// Grid of `ρ N_S` in dB, strictly increasing.
    pub snr_grid_db: Vec<f64>,
    pub trials_per_point: u64,
    pub master_seed: u64,
    /// Gain rule for the naive schemes; ignored otherwise.
    #[serde(default)]
    pub naive_gain: NaiveGain,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials_per_point == 0 {
            return Err(RelayError::InvalidConfig("trials_per_point must be at least 1".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(RelayError::InvalidConfig("SNR grid is empty".into()));
        }
        if self.snr_grid_db.iter().any(|v| !v.is_finite()) {
            return Err(RelayError::InvalidConfig("SNR grid values must be finite".into()));
        }
        if self.snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(RelayError::InvalidConfig("SNR grid must be strictly increasing".into()));
        }
        let rate_ok = match self.rate_policy {
            RatePolicy::FixedRate(r) | RatePolicy::Multiplexing(r) => r.is_finite() && r >= 0.0,
        };
        if !rate_ok {
            return Err(RelayError::InvalidConfig("rate policy parameter must be finite and >= 0".into()));
        }
        if self.scheme == Scheme::OptimalLb && self.encoding != Encoding::MiOnly {
            return Err(RelayError::InvalidConfig(format!(
                "scheme optimal_lb has no per-stream SNRs; use encoding mi_only, not {}",
                self.encoding.name()
            )));
        }
        if let NaiveGain::Fixed(c) = self.naive_gain {
            if !(c > 0.0 && c.is_finite()) {
                return Err(RelayError::InvalidConfig(format!("fixed naive gain must be positive, got {c}")));
            }
        }
        if self.scheme.is_zero_forcing() {
            self.dims.require_zf()?;
        }
        Ok(())
    }

    /// Linear `ρ` at grid point `k`: `10^{dB/10} / N_S`.
    pub fn rho_at(&self, k: usize) -> f64 {
        10f64.powf(self.snr_grid_db[k] / 10.0) / self.dims.n_s() as f64
    }

    /// First trial stream of grid point `k`.
    pub fn stream_base(&self, k: usize) -> u64 {
        k as u64 * self.trials_per_point
    }
}

/// `½ Σ log2(1 + τ_i) < R`.
pub fn outage_event_joint(tau: &[f64], rate: f64) -> bool {
    joint_mi(tau) < rate
}

/// Some stream has `½ log2(1 + τ_i) < R / n_s`.
pub fn outage_event_separate(tau: &[f64], rate: f64, n_s: usize) -> bool {
    let per_stream = rate / n_s as f64;
    tau.iter().any(|t| 0.5 * (1.0 + t).log2() < per_stream)
}

/// Wilson score interval at 95% for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
    (lo.min(p), hi.max(p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutagePoint {
    pub snr_db: f64,
    pub rho: f64,
    pub rate_bits: f64,
    pub trials: u64,
    pub outages: u64,
    pub discards: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl OutagePoint {
    pub fn new(snr_db: f64, rho: f64, rate_bits: f64, trials: u64, outages: u64, discards: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(outages, trials);
        Self { snr_db, rho, rate_bits, trials, outages, discards, p_hat: outages as f64 / trials as f64, ci_low, ci_high }
    }

    /// Binomial standard error of `p_hat`.
    pub fn std_error(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageCurve {
    pub points: Vec<OutagePoint>,
}

impl OutageCurve {
    /// Grid indices where `p_hat` rises by more than three combined CI
    /// widths from the previous point.
    pub fn monotonicity_violations(&self) -> Vec<usize> {
        self.points
            .windows(2)
            .enumerate()
            .filter(|(_, w)| {
                let width = (w[0].ci_high - w[0].ci_low) + (w[1].ci_high - w[1].ci_low);
                w[1].p_hat - w[0].p_hat > 3.0 * width
            })
            .map(|(k, _)| k + 1)
            .collect()
    }

    /// SNR (dB) where the curve crosses `target`, interpolating `log10 p_hat`
    /// linearly in dB between the first bracketing pair.
    pub fn snr_at_probability(&self, target: f64) -> Option<f64> {
        let t = target.log10();
        self.points.windows(2).find_map(|w| {
            let (a, b) = (&w[0], &w[1]);
            if a.p_hat >= target && b.p_hat <= target && a.p_hat > 0.0 && b.p_hat > 0.0 {
                let (la, lb) = (a.p_hat.log10(), b.p_hat.log10());
                if la == lb {
                    return Some(a.snr_db);
                }
                Some(a.snr_db + (la - t) / (la - lb) * (b.snr_db - a.snr_db))
            } else {
                None
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joint_events() {
        assert!(!outage_event_joint(&[3.0, 3.0], 1.9));
        assert!(outage_event_joint(&[3.0, 3.0], 2.1));
        assert!(outage_event_joint(&[0.0, 0.0, 0.0], 1e-9));
        assert!(!outage_event_joint(&[0.0, 0.0], 0.0));
    }

    #[test]
    fn separate_events() {
        assert!(!outage_event_separate(&[3.0, 3.0], 1.9, 2));
        assert!(outage_event_separate(&[15.0, 0.1], 1.9, 2));
        // joint passes (MI = 2 + 0.069) while the weak stream fails
        assert!(!outage_event_joint(&[15.0, 0.1], 1.9));
    }

    #[test]
    fn wilson_brackets_the_estimate() {
        for (k, n) in [(0, 10), (10, 10), (3, 1000), (500, 1000), (1, 1)] {
            let (lo, hi) = wilson_interval(k, n);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi && (0.0..=1.0).contains(&lo) && hi <= 1.0);
        }
        // textbook value: 0 of 10 gives an upper limit of z²/(n + z²)
        let (_, hi) = wilson_interval(0, 10);
        assert!((hi - Z_95 * Z_95 / (10.0 + Z_95 * Z_95)).abs() < 1e-12);
    }

    #[test]
    fn rate_policies() {
        assert_eq!(RatePolicy::FixedRate(2.0).rate_at(123.0), 2.0);
        assert!((RatePolicy::Multiplexing(0.5).rate_at(1024.0) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_interpolation() {
        let pts = vec![
            OutagePoint::new(0.0, 1.0, 1.0, 1000, 100, 0),
            OutagePoint::new(10.0, 10.0, 1.0, 1000, 1, 0),
        ];
        let curve = OutageCurve { points: pts };
        assert!((curve.snr_at_probability(1e-2).unwrap() - 5.0).abs() < 1e-12);
        assert!(curve.snr_at_probability(1e-4).is_none());
    }

    fn base() -> ExperimentConfig {
        ExperimentConfig {
            dims: SystemDims::new(2, 2, 2).unwrap(),
            scheme: Scheme::MmseTx,
            encoding: Encoding::Joint,
            rate_policy: RatePolicy::FixedRate(1.0),
            snr_grid_db: vec![0.0, 10.0],
            trials_per_point: 10,
            master_seed: 1,
            naive_gain: NaiveGain::Variable,
        }
    }

    #[test]
    fn config_validation() {
        assert!(base().validate().is_ok());
        let mut c = base();
        c.snr_grid_db = vec![10.0, 10.0];
        assert!(c.validate().is_err());
        let mut c = base();
        c.scheme = Scheme::OptimalLb;
        assert!(c.validate().is_err());
        c.encoding = Encoding::MiOnly;
        assert!(c.validate().is_ok());
        let mut c = base();
        c.scheme = Scheme::ZfTx;
        c.dims = SystemDims::new(3, 2, 3).unwrap();
        assert!(matches!(c.validate(), Err(RelayError::InvalidDims(_))));
        let mut c = base();
        c.trials_per_point = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn rho_uses_total_power_axis() {
        let c = base();
        assert!((c.rho_at(1) - 5.0).abs() < 1e-12);
    }
}
