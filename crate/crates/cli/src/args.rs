use std::path::PathBuf;

use afrelay::montecarlo::DEFAULT_MIN_COUNT;
use afrelay::transceiver::{Scheme, SystemDims};
use clap::{Parser, Subcommand, ValueEnum};

use crate::config::expand_range;

#[derive(Debug, Parser)]
#[command(name = "afrelay", version, about = "Outage simulation and diversity tradeoffs for MIMO amplify-and-forward relays")]
pub struct Cli {
    /// Worker threads for Monte Carlo runs (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Overrides the master seed of a config, or seeds the verify draws.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate an outage curve from a TOML experiment file.
    Simulate { config: PathBuf },

    /// Diversity-multiplexing tradeoff of a scheme next to the cut-set optimum.
    Dmt {
        #[arg(long, value_parser = parse_dims)]
        dims: SystemDims,
        #[arg(long, value_parser = parse_scheme)]
        scheme: Scheme,
        /// Comma-separated values or `start:stop:step`.
        #[arg(long = "r-grid", value_parser = parse_grid)]
        r_grid: Grid,
    },

    /// Diversity-rate tradeoff bounds at fixed rates (b/s/Hz).
    Drt {
        #[arg(long, value_parser = parse_dims)]
        dims: SystemDims,
        #[arg(long, value_enum)]
        scheme: DrtScheme,
        #[arg(long = "rate-grid", value_parser = parse_grid)]
        rate_grid: Grid,
    },

    /// Fit the high-SNR slope of an outage CSV and compare it with theory.
    Slope {
        csv: PathBuf,
        /// A number, `auto` (read from the curve's JSON companion), or
        /// `dims=A,B,C;scheme=S;fixed_rate=R` (or `multiplexing=r`, optional
        /// `encoding=E`).
        #[arg(long)]
        theory: String,
        /// Allowed distance of the slope from the theoretical range.
        #[arg(long, default_value_t = 0.35)]
        tol: f64,
        /// Outage count a point needs to enter the fit window.
        #[arg(long, default_value_t = DEFAULT_MIN_COUNT)]
        min_count: u64,
    },

    /// Run the invariant battery.
    Verify {
        #[arg(long, value_enum, default_value_t = Level::Fast)]
        level: Level,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum DrtScheme {
    MmseTx,
    NaiveMmse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Waterfilling without the `(·)⁺` clamp.
    SkipWaterfillClamp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

pub fn parse_dims(s: &str) -> Result<SystemDims, String> {
    let parts: Vec<&str> = s.split([',', 'x']).map(str::trim).collect();
    let nums = parts
        .iter()
        .map(|p| p.parse::<usize>().map_err(|_| format!("`{p}` is not an antenna count")))
        .collect::<Result<Vec<_>, _>>()?;
    match nums[..] {
        [a, b, c] => SystemDims::new(a, b, c).map_err(|e| e.to_string()),
        _ => Err(format!("expected three antenna counts N_S,N_R,N_D, got `{s}`")),
    }
}

pub fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse::<Scheme>().map_err(|e| {
        let names: Vec<&str> = Scheme::ALL.iter().map(|k| k.name()).collect();
        format!("{e}; expected one of {}", names.join(", "))
    })
}

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let values = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts[..] else {
            return Err(format!("range must be start:stop:step, got `{s}`"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
        expand_range(num(a)?, num(b)?, num(c)?)?
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
            .collect::<Result<Vec<_>, _>>()?
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err("grid values must be finite".into());
    }
    Ok(Grid(values))
}
