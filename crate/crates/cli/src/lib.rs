//! Batch front end for the `trace_core` library: the `analyze`, `bounds`,
//! `simulate` and `threshold` subcommands, TOML configuration, JSON reports
//! and a static SVG chart.

pub mod args;
pub mod chart;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use args::{Cli, Command};
use config::AnalysisConfig;
pub use error::{CliError, CliResult};

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Analyze(a) => commands::analyze(&AnalysisConfig::resolve(a)?),
        Command::Bounds(b) => commands::bounds(b),
        Command::Simulate(s) => commands::simulate_cmd(s),
        Command::Threshold(t) => commands::threshold(t),
    }
}
