#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use crate::config::{resolve, Cli};
use crate::error::CliError;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let (cfg, exec) = resolve(cli.command, &cli.flags)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(exec.threads)
        .build()
        .map_err(|e| CliError::Other(e.to_string()))?;
    let start = Instant::now();
    let runtime = || exec.timing.then(|| start.elapsed().as_secs_f64());
    let outcome = pool.install(|| commands::run(&cfg, &runtime))?;

    match &exec.out {
        Some(path) => {
            std::fs::write(path, &outcome.report).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            for (suffix, bytes) in &outcome.extras {
                let extra = sibling(path, suffix);
                std::fs::write(&extra, bytes).map_err(|source| CliError::Io { path: extra, source })?;
            }
            println!("{}", outcome.summary);
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&outcome.report)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Other(e.to_string()))?;
            eprintln!("{}", outcome.summary);
        }
    }
    match outcome.failure {
        Some(msg) => Err(CliError::Other(msg)),
        None => Ok(()),
    }
}

/// `dir/report.json` with suffix `ecdf-limit` becomes `dir/report.ecdf-limit.csv`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}
