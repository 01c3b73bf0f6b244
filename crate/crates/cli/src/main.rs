//! `hfo-pipe`: synthetic data, HFO detection, outcome reports, parameter
//! sweeps and analog design targets.

// `!(x > 0.0)` is how NaN is rejected alongside the range check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod design;
mod detect;
mod failure;
mod model;
mod render;
mod report;
mod sweep;
mod synth;

use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

pub const THREADS_ENV: &str = "HFO_PIPE_THREADS";

#[derive(Parser)]
#[command(name = "hfo-pipe", version, about = "Spiking HFO detection pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic recording and its planted-event annotations.
    Synth(synth::SynthArgs),
    /// Detect HFOs and write per-interval events and per-patient reports.
    Detect(config::RunArgs),
    /// Classify outcomes and compute group metrics from patient reports.
    Report(report::ReportArgs),
    /// Score a grid of encoder and network settings against labeled events.
    Sweep(config::RunArgs),
    /// Print f0, gain and bandwidth for band-pass component values.
    Design(design::DesignArgs),
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        failure::config(format!("{THREADS_ENV}={v:?} must be a positive integer"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| failure::invariant(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    match cli.command {
        Command::Synth(a) => synth::run(&a),
        Command::Detect(a) => detect::run(&a),
        Command::Report(a) => report::run(&a),
        Command::Sweep(a) => sweep::run(&a),
        Command::Design(a) => design::run(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(failure::exit_code(&e))
        }
    }
}
