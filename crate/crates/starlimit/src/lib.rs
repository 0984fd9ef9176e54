//! Batch driver for `starlimit-core`: JSON run configs, CSV tables, run
//! manifests and thread-count independent Monte Carlo.
//!
//! ```text
//! starlimit <subcommand> --config <path> --out <dir> [--threads <n|auto>] [--seed <u64>]
//! ```
//!
//! Exit codes: 0 success, 1 invalid input or unwritable output, 2 numerical
//! guard tripped or failed selftest.

pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod mc;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "starlimit", version, about = "Snapping-out and Walsh diffusions on star graphs")]
pub struct Args {
    /// One of: resolvent, walsh-resolvent, markov, cosine, semigroup,
    /// sticky-semigroup, converge-resolvent, converge-semigroup,
    /// converge-cosine, diverge-cosine, mc, selftest.
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(commands::SUBCOMMANDS))]
    pub subcommand: String,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads, or `auto`.
    #[arg(long, default_value = "auto", value_parser = parse_threads)]
    pub threads: usize,
    /// Overrides `mc.master_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_threads(s: &str) -> Result<usize, String> {
    if s == "auto" {
        return Ok(0);
    }
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err("expected a positive integer or `auto`".into()),
    }
}

/// Load, run and write; returns the paths written. A failed selftest
/// writes its table before reporting the failure.
pub fn execute(args: &Args) -> Result<Vec<PathBuf>, CliError> {
    let start = Instant::now();
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.mc.master_seed = seed;
    }
    let (out, threads) = mc::with_threads(args.threads, || {
        (commands::dispatch(&args.subcommand, &cfg), rayon::current_num_threads())
    });
    let out = out?;
    let written = output::write_run(
        &args.out,
        &args.subcommand,
        &cfg,
        &out.tables,
        threads,
        start.elapsed().as_secs_f64(),
        out.timings,
    )?;
    match out.failure {
        Some(e) => Err(e),
        None => Ok(written),
    }
}

/// Parse `argv` and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&args) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("starlimit {}: {e}", args.subcommand);
            e.exit_code()
        }
    }
}
