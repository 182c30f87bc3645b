mod args;
mod commands;
mod error;
mod output;
mod systems;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::error::CliError;

fn report(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    if let Some(hint) = e.hint() {
        eprintln!("hint: {hint}");
    }
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    if cli.threads == Some(0) {
        return report(&CliError::Usage("--threads must be at least 1".into()));
    }
    match reclab::par::install(cli.threads, || commands::execute(&cli)) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(deferred)) => report(&deferred),
        Err(e) => report(&e),
    }
}
