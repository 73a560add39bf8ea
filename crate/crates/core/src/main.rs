use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use curvekit::cli::{run, write_atomically, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let written = match cli.command.output() {
        Some(path) => write_atomically(path, &report.text),
        None => std::io::stdout()
            .write_all(report.text.as_bytes())
            .map_err(Into::into),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    if report.success {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
