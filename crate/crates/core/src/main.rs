use std::process::ExitCode;

use clap::Parser;
use urs::cli::{emit, execute, Cli, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let outcome = execute(&cli);
    if let Err(e) = emit(&outcome, cli.global.format, cli.global.out.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    ExitCode::from(outcome.code as u8)
}
