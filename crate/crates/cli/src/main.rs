use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use unimodal_cli::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if cli.out.is_none() {
                let mut stdout = std::io::stdout().lock();
                if stdout.write_all(outcome.report.as_bytes()).is_err() {
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(exit_code(outcome.verdict) as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
