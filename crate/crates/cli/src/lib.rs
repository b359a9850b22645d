//! Command-line front end for the relay laboratory: experiment files,
//! outage simulation, tradeoff tables, slope checks and the invariant battery.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod verify;

use args::{Cli, Command};
use commands::{dmt_table, drt_table, emit_table, Global};
use error::CliError;
use verify::{run_battery, BatteryOptions, DEFAULT_VERIFY_SEED};

pub fn run(cli: Cli) -> Result<(), CliError> {
    let g = Global { workers: cli.workers, seed: cli.seed, out: cli.out };
    match cli.command {
        Command::Simulate { config } => {
            let out = commands::simulate(&config, &g)?;
            println!("{}", out.csv.display());
            println!("{}", out.json.display());
            println!("{}", out.manifest.display());
        }
        Command::Dmt { dims, scheme, r_grid } => {
            let rows = dmt_table(dims, scheme, &r_grid.0)?;
            emit_table(&rows, &format!("dmt_{dims}_{scheme}.csv"), &g)?;
        }
        Command::Drt { dims, scheme, rate_grid } => {
            let rows = drt_table(dims, scheme, &rate_grid.0)?;
            let name = match scheme {
                args::DrtScheme::MmseTx => "mmse_tx",
                args::DrtScheme::NaiveMmse => "naive_mmse",
            };
            emit_table(&rows, &format!("drt_{dims}_{name}.csv"), &g)?;
        }
        Command::Slope { csv, theory, tol, min_count } => {
            let report = commands::slope(&csv, &theory, tol, min_count, &g)?;
            if !report.pass {
                return Err(CliError::Failed(format!(
                    "slope {:.3} outside [{} - {tol}, {} + {tol}]",
                    report.slope, report.theory.lower, report.theory.upper
                )));
            }
        }
        Command::Verify { level, inject_fault } => {
            let checks = run_battery(BatteryOptions {
                level,
                fault: inject_fault,
                seed: g.seed.unwrap_or(DEFAULT_VERIFY_SEED),
                workers: g.workers,
            });
            for c in &checks {
                println!("{}", c.line());
            }
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
            if !failed.is_empty() {
                return Err(CliError::Failed(format!("violated: {}", failed.join(", "))));
            }
        }
    }
    Ok(())
}
