//! TOML experiment files.
//!
//! ```toml
//! dims = [2, 4, 2]          # N_S, N_R, N_D
//! scheme = "zf_tx"
//! encoding = "joint"
//! trials_per_point = 100000 # optional
//! master_seed = 7           # optional
//! naive_gain = "variable"   # optional; or { fixed = 0.5 }
//!
//! [rate_policy]
//! fixed_rate = 3.32         # or: multiplexing = 0.5
//!
//! [grid]                    # optional
//! start = 15.0
//! stop = 30.0
//! step = 5.0                # or: snr_db = [15.0, 20.0, 25.0, 30.0]
//! ```

use std::path::Path;

use afrelay::montecarlo::{Encoding, ExperimentConfig, RatePolicy};
use afrelay::transceiver::{NaiveGain, Scheme, SystemDims};
use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 1;
const DEFAULT_GRID: (f64, f64, f64) = (0.0, 30.0, 5.0);

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub dims: SystemDims,
    pub scheme: Scheme,
    pub encoding: Encoding,
    pub rate_policy: RatePolicy,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_trials")]
    pub trials_per_point: u64,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default)]
    pub naive_gain: NaiveGain,
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

/// SNR grid in dB of `ρ N_S`: an explicit list or an inclusive range.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub snr_db: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub step: Option<f64>,
}

impl GridSpec {
    pub fn resolve(&self) -> Result<Vec<f64>, String> {
        let range = (self.start, self.stop, self.step);
        match (&self.snr_db, range) {
            (Some(_), (None, None, None)) => Ok(self.snr_db.clone().unwrap_or_default()),
            (Some(_), _) => Err("grid: give either `snr_db` or `start`/`stop`/`step`, not both".into()),
            (None, (None, None, None)) => expand_range(DEFAULT_GRID.0, DEFAULT_GRID.1, DEFAULT_GRID.2),
            (None, (Some(a), Some(b), Some(s))) => expand_range(a, b, s),
            (None, _) => Err("grid: `start`, `stop` and `step` must be given together".into()),
        }
    }
}

/// `start, start + step, …` up to and including `stop` (with a small slack
/// for accumulated rounding).
pub fn expand_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 || stop < start {
        return Err(format!("bad range {start}:{stop}:{step}; need start <= stop and step > 0"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(format!("range {start}:{stop}:{step} has {count} points"));
    }
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Expands the grid and applies a seed override. Dimension checks are left
    /// to [`ExperimentConfig::validate`].
    pub fn resolve(&self, seed: Option<u64>) -> Result<ExperimentConfig, CliError> {
        let snr_grid_db = self.grid.resolve().map_err(CliError::Config)?;
        Ok(ExperimentConfig {
            dims: self.dims,
            scheme: self.scheme,
            encoding: self.encoding,
            rate_policy: self.rate_policy,
            snr_grid_db,
            trials_per_point: self.trials_per_point,
            master_seed: seed.unwrap_or(self.master_seed),
            naive_gain: self.naive_gain,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
dims = [1, 1, 1]
scheme = "mmse_tx"
encoding = "joint"
[rate_policy]
fixed_rate = 1.0
"#;

    #[test]
    fn defaults_fill_optional_fields() {
        let c = ConfigFile::parse(MINIMAL).unwrap().resolve(None).unwrap();
        assert_eq!(c.trials_per_point, DEFAULT_TRIALS);
        assert_eq!(c.master_seed, DEFAULT_SEED);
        assert_eq!(c.snr_grid_db, vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]);
        assert_eq!(c.naive_gain, NaiveGain::Variable);
        assert_eq!(c.rate_policy, RatePolicy::FixedRate(1.0));
    }

    #[test]
    fn grid_forms() {
        let text = format!("{MINIMAL}[grid]\nstart = 15\nstop = 35\nstep = 5\n");
        let c = ConfigFile::parse(&text).unwrap().resolve(Some(9)).unwrap();
        assert_eq!(c.snr_grid_db, vec![15.0, 20.0, 25.0, 30.0, 35.0]);
        assert_eq!(c.master_seed, 9);

        let text = format!("{MINIMAL}[grid]\nsnr_db = [1.5, 2.5]\n");
        assert_eq!(ConfigFile::parse(&text).unwrap().resolve(None).unwrap().snr_grid_db, vec![1.5, 2.5]);

        let text = format!("{MINIMAL}[grid]\nsnr_db = [1.5]\nstart = 0\n");
        assert!(ConfigFile::parse(&text).unwrap().resolve(None).is_err());
        let text = format!("{MINIMAL}[grid]\nstart = 0\nstop = 10\n");
        assert!(ConfigFile::parse(&text).unwrap().resolve(None).is_err());
    }

    #[test]
    fn range_includes_stop_despite_rounding() {
        let g = expand_range(0.0, 1.0, 0.1).unwrap();
        assert_eq!(g.len(), 11);
        assert!(expand_range(1.0, 0.0, 0.1).is_err());
        assert!(expand_range(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn multiplexing_and_fixed_gain() {
        let text = r#"
dims = [2, 2, 2]
scheme = "naive_zf"
encoding = "separate"
naive_gain = { fixed = 0.5 }
[rate_policy]
multiplexing = 0.25
"#;
        let c = ConfigFile::parse(text).unwrap();
        assert_eq!(c.rate_policy, RatePolicy::Multiplexing(0.25));
        assert_eq!(c.naive_gain, NaiveGain::Fixed(0.5));
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let text = MINIMAL.replace("encoding = \"joint\"", "encoding = \"joint\"\ntrails_per_point = 5");
        let msg = ConfigFile::parse(&text).unwrap_err().to_string();
        assert!(msg.contains("line 5"), "{msg}");
        assert!(msg.contains("trails_per_point"), "{msg}");

        let msg = ConfigFile::parse(&MINIMAL.replace("mmse_tx", "mmse")).unwrap_err().to_string();
        assert!(msg.contains("line 3") && msg.contains("mmse"), "{msg}");

        let msg = ConfigFile::parse(&MINIMAL.replace("[1, 1, 1]", "[1, 0, 1]")).unwrap_err().to_string();
        assert!(msg.contains("antenna"), "{msg}");

        let msg = ConfigFile::parse("dims = [1, 1, 1]\n").unwrap_err().to_string();
        assert!(msg.contains("scheme"), "{msg}");
    }
}
