use std::path::PathBuf;
use std::process::ExitCode;

use beables::config::Format;
use beables::run::{run, Overrides};
use beables::RunError;
use clap::{Parser, Subcommand};

/// Environment variable overriding the worker thread count.
const THREADS_ENV: &str = "BEABLES_THREADS";

#[derive(Parser)]
#[command(name = "beables", version, about = "Evaluate ABL beable scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its outputs next to the chosen prefix.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output path prefix; files are named <PREFIX>_field.csv etc.
        #[arg(long)]
        out: Option<String>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Worker threads (default: BEABLES_THREADS, else all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, RunError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| RunError::validation(THREADS_ENV, format!("{v:?} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn execute(cli: Cli) -> Result<(), RunError> {
    let Command::Run { config, seed, out, format, threads } = cli.command;
    if let Some(n) = thread_count(threads)? {
        if n == 0 {
            return Err(RunError::validation("threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| RunError::Invariant(format!("thread pool: {e}")))?;
    }
    let report = run(&config, &Overrides { seed, out, format })?;
    println!("{}: {} checks passed", report.kind, report.checks.len());
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
