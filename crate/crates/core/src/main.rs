use std::process::ExitCode;

use clap::Parser;
use perdyn::cli::{run_cli, Cli};

fn main() -> ExitCode {
    ExitCode::from(run_cli(Cli::parse()))
}
