//! Command-line front end for `scalemetrics-core`.

pub mod args;
pub mod commands;
pub mod error;
pub mod input;
pub mod report;

use args::{Cli, Command};
use commands::Output;
use error::Result;

pub fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Analyze(a) => commands::analyze(a, cli.seed),
        Command::Simulate(a) => commands::simulate(a, cli.seed),
        Command::Compare(a) => commands::compare(a, cli.seed),
        Command::Report(a) => commands::render(a),
    }
}
