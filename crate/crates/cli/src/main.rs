//! `dcor-chisq`: distance correlation independence tests from the command
//! line. Every command prints one JSON object on stdout.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 data.

mod args;
mod commands;
mod error;
mod io;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Command};
use error::CliResult;

fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Test(a) => commands::test(a),
        Command::Ksample(a) => commands::ksample(a),
        Command::Partial(a) => commands::partial(a),
        Command::Power(a) => commands::power(a),
        Command::Nullsim(a) => commands::nullsim(a),
        Command::Bench(a) => commands::bench(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let start = Instant::now();
    // Wall time goes to stderr so stdout stays identical across runs.
    match run(&cli).and_then(|out| io::write_stdout(&out)) {
        Ok(()) => {
            eprintln!("wall time: {:.6} s", start.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
