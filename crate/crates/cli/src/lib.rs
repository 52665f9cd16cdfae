//! The `oiqa` command suite: distortion synthesis, viewport rendering,
//! full-reference metrics, subjective screening, model scoring and evaluation.

pub mod args;
pub mod commands;
pub mod config;

use std::ffi::OsString;

use anyhow::{Context, Result};
use clap::Parser;

pub use args::Cli;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "OIQA_THREADS";

fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .with_context(|| format!("{THREADS_ENV}=`{v}` is not a thread count"))?,
        Err(_) => 0,
    };
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

/// Runs a parsed command and returns its one-line summary.
pub fn run(cli: Cli) -> Result<String> {
    thread_pool()?.install(|| commands::dispatch(cli.command))
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match config::expand_args(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
