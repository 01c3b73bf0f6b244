//! `synth`: synthetic iEEG with planted HFOs.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use hfo_core::signal_io::{save_annotations, save_recording, synthesize_ieeg};
use hfo_core::{RecordingFormat, SynthSpec};
use serde::Serialize;

use crate::config::{self, DEFAULT_OUT};
use crate::failure;

#[derive(Debug, Clone, clap::Args)]
pub struct SynthArgs {
    /// JSON synthesis spec.
    #[arg(value_name = "SPEC")]
    pub spec: PathBuf,
    /// Overrides the seed in the spec.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = DEFAULT_OUT)]
    pub out: PathBuf,
    /// Write the recording in the binary format instead of CSV.
    #[arg(long)]
    pub binary: bool,
}

#[derive(Serialize)]
struct SynthManifest<'a> {
    spec: &'a SynthSpec,
    recording: &'a str,
    annotations: &'a str,
}

pub fn run(args: &SynthArgs) -> Result<()> {
    let text = fs::read_to_string(&args.spec)
        .map_err(|e| failure::config(format!("cannot read spec {}: {e}", args.spec.display())))?;
    let mut spec: SynthSpec = serde_json::from_str(&text)
        .map_err(|e| failure::config(format!("spec {}: {e}", args.spec.display())))?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let (rec, ann) = synthesize_ieeg(&spec)
        .map_err(failure::as_config)
        .context("synthesis stage")?;
    let (format, rec_name) = if args.binary {
        (RecordingFormat::Binary, "recording.bin")
    } else {
        (RecordingFormat::Csv, "recording.csv")
    };
    config::create_dir(&args.out)?;
    save_recording(args.out.join(rec_name), &rec, format)?;
    save_annotations(args.out.join("annotations.csv"), &ann)?;
    let manifest = SynthManifest {
        spec: &spec,
        recording: rec_name,
        annotations: "annotations.csv",
    };
    config::write_manifest(&args.out, "synth", &manifest)?;
    println!(
        "{} channels, {} s at {} Hz, {} planted events -> {}",
        rec.channels().len(),
        rec.duration_s(),
        rec.sample_rate_hz(),
        ann.len(),
        args.out.display()
    );
    Ok(())
}
