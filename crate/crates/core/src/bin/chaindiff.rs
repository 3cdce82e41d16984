use std::io::Write;
use std::process::ExitCode;

use chaindiff::cli::{expand_inline_bindings, run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse_from(expand_inline_bindings(std::env::args().collect()));
    let outcome = run(&cli.command);
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    ExitCode::from(outcome.code as u8)
}
