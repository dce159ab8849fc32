//! Command-line orchestration for `xilab-core`: configuration, a worker pool
//! and deterministic JSON/CSV reports.
//!
//! Exit codes: 0 success, 1 usage error, 2 a required margin could not be
//! certified (or another numerical failure), 3 a reproduction check failed.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;

use clap::Parser;

use crate::cli::Cli;
use crate::config::{FileConfig, Overrides, RunConfig};
use crate::report::Outcome;

/// Parses `args`, runs the subcommand and emits its reports.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let cfg = match resolve_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 1;
        }
    };
    let outcome = match execute(&cli.command, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 1;
        }
    };
    if let Err(e) = outcome.emit(&cfg) {
        eprintln!("error: {e:#}");
        return 1;
    }
    let status = &outcome.report.status;
    if status.exit_code() != 0 {
        eprintln!("{}: {}", outcome.report.subcommand, serde_json::to_string(status).unwrap_or_default());
    }
    status.exit_code()
}

pub fn resolve_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let file = match &cli.global.config {
        Some(p) => FileConfig::load(p)?,
        None => RunConfig::file_from_env()?,
    };
    let g = &cli.global;
    RunConfig::resolve(
        file,
        Overrides {
            digits: g.digits,
            tol: g.tol,
            abs_tol: g.abs_tol,
            max_panels: g.max_panels,
            jobs: g.jobs,
            out: g.out.clone(),
            formats: g.format.clone(),
        },
    )
}

/// Runs a subcommand on a pool of `cfg.parallelism` workers.
pub fn execute(cmd: &cli::Command, cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.parallelism).build()?;
    Ok(pool.install(|| commands::dispatch(cmd, cfg)))
}
