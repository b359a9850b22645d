use rayon::prelude::*;

use super::spectral::{self, Spectra};
use super::{outage_event_joint, outage_event_separate, Encoding, ExperimentConfig, OutageCurve, OutagePoint};
use crate::error::{RelayError, Result};
use crate::matcore::{sample_channel, SeededRng};
use crate::transceiver::{
    design_mmse_relay, design_naive_relay_with, design_zf_relay, end_to_end_mi, optimal_mi_lower_bound,
    ChannelRealization, NaiveCovariance, NaiveEqualizer, PowerBudget, RelayDesign, Scheme,
};

/// Resampling attempts per trial before a run is aborted.
pub const MAX_RESAMPLES: u32 = 64;

/// Trials handed to one task.
const CHUNK: u64 = 4096;

/// How each trial's SNRs or mutual information are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalPath {
    /// Closed forms in the channel eigenbasis where the scheme admits them,
    /// falling back to the full design otherwise.
    #[default]
    Spectral,
    /// Always build the complete [`RelayDesign`].
    FullDesign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EngineOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub path: EvalPath,
}

pub fn estimate_outage(cfg: &ExperimentConfig) -> Result<OutageCurve> {
    estimate_outage_with(cfg, EngineOptions::default())
}

pub fn estimate_outage_with(cfg: &ExperimentConfig, opts: EngineOptions) -> Result<OutageCurve> {
    cfg.validate()?;
    let run = || -> Result<OutageCurve> {
        let points = (0..cfg.snr_grid_db.len()).map(|k| estimate_point(cfg, k, opts.path)).collect::<Result<_>>()?;
        let curve = OutageCurve { points };
        for k in curve.monotonicity_violations() {
            log::warn!(
                "outage estimate rises from {:.3e} to {:.3e} between {} dB and {} dB",
                curve.points[k - 1].p_hat,
                curve.points[k].p_hat,
                curve.points[k - 1].snr_db,
                curve.points[k].snr_db
            );
        }
        Ok(curve)
    };
    match opts.workers {
        None => run(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| RelayError::InvalidConfig(format!("cannot start worker pool: {e}")))?
            .install(run),
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    outages: u64,
    discards: u64,
}

fn estimate_point(cfg: &ExperimentConfig, k: usize, path: EvalPath) -> Result<OutagePoint> {
    let rho = cfg.rho_at(k);
    let pw = PowerBudget::standard(rho, cfg.dims)?;
    let rate = cfg.rate_policy.rate_at(rho);
    let trials = cfg.trials_per_point;
    let base = cfg.stream_base(k);

    let chunks = trials.div_ceil(CHUNK);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Tally::default();
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let (outage, discards) = run_trial(cfg, pw, rate, base + t, path)?;
                acc.outages += u64::from(outage);
                acc.discards += discards;
            }
            Ok(acc)
        })
        .try_reduce(Tally::default, |a, b| Ok(Tally { outages: a.outages + b.outages, discards: a.discards + b.discards }))?;

    Ok(OutagePoint::new(cfg.snr_grid_db[k], rho, rate, trials, tally.outages, tally.discards))
}

/// Outage indicator for one trial plus the number of discarded draws.
fn run_trial(cfg: &ExperimentConfig, pw: PowerBudget, rate: f64, stream: u64, path: EvalPath) -> Result<(bool, u64)> {
    let mut rng = SeededRng::new(cfg.master_seed, stream);
    let mut attempt = 0;
    loop {
        match trial_outage(cfg, pw, rate, &mut rng, path) {
            Ok(outage) => return Ok((outage, u64::from(attempt))),
            Err(RelayError::SingularSystem { what, condition }) => {
                attempt += 1;
                if attempt > MAX_RESAMPLES {
                    return Err(RelayError::SingularSystem { what, condition });
                }
                log::debug!("stream {stream}: discarding draw ({what}, condition {condition:.3e})");
                rng = SeededRng::reserved(cfg.master_seed, stream, attempt);
            }
            Err(e) => return Err(e),
        }
    }
}

fn trial_outage(cfg: &ExperimentConfig, pw: PowerBudget, rate: f64, rng: &mut SeededRng, path: EvalPath) -> Result<bool> {
    let dims = cfg.dims;
    let h = sample_channel(dims.n_r(), dims.n_s(), rng);
    let g = sample_channel(dims.n_d(), dims.n_r(), rng);

    if path == EvalPath::Spectral {
        let per_stream_code = cfg.encoding != Encoding::MiOnly;
        match cfg.scheme {
            Scheme::MmseTx if per_stream_code => {
                let tau = spectral::mmse_tau(&Spectra::new(&h, &g)?, pw, dims);
                return Ok(per_stream(cfg, &tau, rate));
            }
            Scheme::ZfTx if per_stream_code => {
                let tau = spectral::zf_tau(&Spectra::new(&h, &g)?, pw, dims)?;
                return Ok(per_stream(cfg, &tau, rate));
            }
            Scheme::OptimalLb => return Ok(spectral::optimal_mi(&Spectra::new(&h, &g)?, pw, dims) < rate),
            _ => {}
        }
    }

    let ch = ChannelRealization::new(h, g)?;
    let design = build_design(cfg, &ch, pw)?;
    match (cfg.encoding, &design.tau, design.mi) {
        (Encoding::MiOnly, _, Some(mi)) => Ok(mi < rate),
        (Encoding::MiOnly, _, None) => Ok(end_to_end_mi(&ch, &design.q, pw.rho)? < rate),
        (_, Some(tau), _) => Ok(per_stream(cfg, tau, rate)),
        (_, None, _) => Err(RelayError::InvalidConfig(format!("scheme {} has no per-stream SNRs", cfg.scheme))),
    }
}

fn per_stream(cfg: &ExperimentConfig, tau: &[f64], rate: f64) -> bool {
    match cfg.encoding {
        Encoding::Separate => outage_event_separate(tau, rate, cfg.dims.n_s()),
        _ => outage_event_joint(tau, rate),
    }
}

fn build_design(cfg: &ExperimentConfig, ch: &ChannelRealization, pw: PowerBudget) -> Result<RelayDesign> {
    let dims = cfg.dims;
    match cfg.scheme {
        Scheme::MmseTx => design_mmse_relay(ch, pw, dims),
        Scheme::ZfTx => design_zf_relay(ch, pw, dims),
        Scheme::NaiveMmse => {
            design_naive_relay_with(ch, pw, dims, NaiveEqualizer::Mmse, cfg.naive_gain, NaiveCovariance::Exact)
        }
        Scheme::NaiveZf => {
            design_naive_relay_with(ch, pw, dims, NaiveEqualizer::Zf, cfg.naive_gain, NaiveCovariance::Exact)
        }
        Scheme::OptimalLb => optimal_mi_lower_bound(ch, pw, dims),
    }
}
