//! Command-line front end of the SMIR engine: argument parsing, the
//! end-to-end pipeline, run manifests and SVG output.

pub mod args;
pub mod commands;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod svg;

use args::{Cli, Command};
use error::CliError;

/// Runs a parsed command line and returns the text for stdout.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Meanfield(a) => commands::cmd_meanfield(a),
        Command::Pipeline(a) => commands::cmd_pipeline(a),
        Command::Sweep(a) => commands::cmd_sweep(a),
        Command::GenScenario(a) => commands::cmd_gen_scenario(a),
        Command::Inspect(a) => commands::cmd_inspect(a),
        Command::Replay(a) => commands::cmd_replay(a),
    }
}
