//! `rcp` — command-line analysis and simulation of the RCP congestion
//! control fluid model.
//!
//! Every subcommand writes CSV (or flat key=value) artifacts plus a run
//! manifest into `--out-dir`, and the same flags always produce
//! byte-identical data files. Exit codes: `0` success, `1` invalid
//! parameter or configuration (the message names the offending entry),
//! `2` internal numerical failure or an inconclusive analysis.

mod cli;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;
use rcp_core::Error;

/// Environment variable selecting the worker-thread count for sweep
/// subcommands; defaults to the number of processors.
const WORKERS_VAR: &str = "RCP_WORKERS";

fn main() -> ExitCode {
    let parsed = match cli::Cli::try_parse() {
        Ok(parsed) => parsed,
        Err(err) => {
            // Help and version requests arrive here too; only genuine
            // usage errors are failures.
            let code = u8::from(err.use_stderr());
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    if let Err(err) = init_workers() {
        eprintln!("error: {err}");
        return ExitCode::from(exit_code(&err));
    }

    match commands::dispatch(parsed) {
        Ok(commands::Completion::Clean) => ExitCode::SUCCESS,
        // A completed run whose checks reported failures (repro).
        Ok(commands::Completion::ChecksFailed) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Maps library errors onto the documented exit codes.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Domain { .. } | Error::Config { .. } => 1,
        Error::Inconclusive(_) | Error::Convergence(_) | Error::Internal(_) => 2,
    }
}

/// Sizes the global worker pool from the environment, if requested.
fn init_workers() -> Result<(), Error> {
    let Ok(raw) = std::env::var(WORKERS_VAR) else {
        return Ok(());
    };
    let workers: usize = raw.parse().map_err(|_| {
        Error::config(
            WORKERS_VAR,
            format!("worker count must be a positive integer, got `{raw}`"),
        )
    })?;
    if workers == 0 {
        return Err(Error::config(
            WORKERS_VAR,
            "worker count must be at least 1",
        ));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| Error::config(WORKERS_VAR, format!("failed to size the worker pool: {e}")))
}
