//! Library side of the `manakov` command: config handling, commands and output formats.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "manakov", version, about = "Manakov flows on so(n): simulation and randomized verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a flow; write the trajectory CSV and a conservation report.
    Simulate(Common),
    /// Run the configured verification targets; write a verdict JSON.
    Verify(Common),
    /// Run the targets over partitions of n; write one CSV row per (partition, target).
    Sweep(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; relative output paths in the config are resolved against it.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Comma-separated seeds, replacing the config's list.
    #[arg(long)]
    pub seeds: Option<String>,
    /// Tolerance override `key=value`; repeatable.
    #[arg(long = "tol-override")]
    pub tol_override: Vec<String>,
    /// Worker threads (default: one per core). Results do not depend on it.
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Whether the command's checks passed; errors are reported separately.
pub fn run(cli: &Cli) -> Result<bool, CliError> {
    let (Command::Simulate(common) | Command::Verify(common) | Command::Sweep(common)) = &cli.command;
    let overrides = Overrides {
        seeds: common.seeds.as_deref().map(config::parse_seeds).transpose()?,
        tolerances: common.tol_override.iter().map(|s| config::parse_tol_override(s)).collect::<Result<_, _>>()?,
    };
    if common.jobs == Some(0) {
        return Err(CliError::field("--jobs", "must be at least 1"));
    }
    let setup = RunConfig::load(&common.config)?.validate(&overrides)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(&cli.command, &setup, &common.out))
}

fn dispatch(command: &Command, setup: &config::Setup, out: &Path) -> Result<bool, CliError> {
    let paths = &setup.raw.output;
    match command {
        Command::Simulate(_) => {
            let sim = commands::simulate(setup)?;
            output::write_csv(&output::resolve(out, &paths.trajectory)?, output::trajectory_csv(&sim.trajectory))?;
            output::write_json(&output::resolve(out, &paths.report)?, &sim.report)?;
            Ok(sim.report.pass)
        }
        Command::Verify(_) => {
            let report = commands::verify(setup)?;
            output::write_json(&output::resolve(out, &paths.verdict)?, &report)?;
            Ok(report.pass)
        }
        Command::Sweep(_) => {
            let rows = commands::sweep(setup)?;
            output::write_csv(&output::resolve(out, &paths.sweep)?, output::sweep_csv(&rows))?;
            Ok(rows.iter().all(|r| r.verdict != "FAIL"))
        }
    }
}
