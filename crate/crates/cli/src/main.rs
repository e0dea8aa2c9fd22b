// `!(x > 0.0)` rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::Cli;

/// Environment variable holding the worker-thread count.
const THREADS_ENV: &str = "THREEMODE_THREADS";

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Invalid(String),
    Compute(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 64,
            Failure::Invalid(_) => 65,
            Failure::Compute(_) => 70,
            Failure::Io(_) => 74,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Invalid(m) | Failure::Compute(m) | Failure::Io(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return report(&clap_failure(&e)),
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(&f),
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    configure_threads()?;
    let artifact = commands::run(&cli.command)?;
    let bytes = artifact.render(cli.output.format, !cli.output.no_timestamp).map_err(|e| Failure::Io(e.to_string()))?;
    output::emit(&bytes, cli.output.out.as_deref())
        .map_err(|e| Failure::Io(format!("{}: {e}", cli.output.out.as_deref().unwrap_or("stdout".as_ref()).display())))
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Invalid(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Compute(e.to_string()))
}

/// Value errors are invalid parameters; everything else clap rejects is a
/// usage error.
fn clap_failure(e: &clap::Error) -> Failure {
    let text = e.to_string();
    let first = text.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
    match e.kind() {
        ErrorKind::InvalidValue | ErrorKind::ValueValidation => Failure::Invalid(first),
        _ => Failure::Usage(first),
    }
}

fn report(f: &Failure) -> ExitCode {
    let msg = f.message().replace('\n', " ");
    eprintln!("threemode: error[{}]: {msg}", f.code());
    ExitCode::from(f.code())
}
