//! `ahe-eigen`: eigenvalues, sweeps, self-checks and expansion fits from the
//! command line.
//!
//! Exit status: 0 success, 1 a check or verdict failed (or a computation
//! errored), 2 usage error.

mod commands;
mod config;
mod output;
mod verify;

use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Result;
use clap::Parser;
use serde_json::json;

use config::{Cli, RunConfig, UsageError};

fn write_metadata(cfg: &RunConfig, elapsed: f64, passed: bool) -> Result<()> {
    let Some(path) = &cfg.metadata else {
        return Ok(());
    };
    let unix_time = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let meta = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "unix_time": unix_time,
        "elapsed_seconds": elapsed,
        "passed": passed,
        "config": cfg,
    });
    let mut bytes = serde_json::to_vec_pretty(&meta)?;
    bytes.push(b'\n');
    output::emit(&bytes, Some(path))
}

fn run(cfg: &RunConfig) -> Result<bool> {
    if let Some(jobs) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()?;
    }
    let start = Instant::now();
    let outcome = commands::run(&cfg.command, cfg.format)?;
    output::emit(&outcome.bytes, cfg.output_path().as_deref())?;
    for f in &outcome.failures {
        eprintln!("FAILED {f}");
    }
    write_metadata(cfg, start.elapsed().as_secs_f64(), outcome.passed)?;
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let cfg = match RunConfig::from_cli(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
