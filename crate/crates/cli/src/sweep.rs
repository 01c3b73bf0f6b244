//! `sweep`: grid search over encoder and network settings on labeled data.

use anyhow::{Context, Result};
use hfo_core::analytics::{sweep_parameters, LabeledRecording};
use hfo_core::signal_io::{load_annotations, load_recording, synthesize_ieeg};
use hfo_core::RecordingFormat;

use crate::config::{self, RunArgs, RunConfig};
use crate::failure;

fn labeled_input(cfg: &RunConfig) -> Result<LabeledRecording> {
    if cfg.inputs.len() > 1 {
        return Err(failure::config("sweep takes a single recording"));
    }
    let (recording, planted) = match (cfg.inputs.first(), &cfg.synth) {
        (Some(path), _) => {
            let rec = load_recording(path, RecordingFormat::from_path(path))
                .with_context(|| format!("load stage, {}", path.display()))?;
            (rec, None)
        }
        (None, Some(spec)) => {
            let (rec, ann) = synthesize_ieeg(spec).context("synthesis stage")?;
            (rec, Some(ann))
        }
        (None, None) => return Err(failure::config("no input recording")),
    };
    let annotations = match (&cfg.annotations, planted) {
        (Some(path), _) => {
            load_annotations(path).with_context(|| format!("load stage, {}", path.display()))?
        }
        (None, Some(ann)) => ann,
        (None, None) => {
            return Err(failure::config(
                "sweep needs --annotations for a recorded input",
            ))
        }
    };
    Ok(LabeledRecording {
        recording,
        annotations,
    })
}

pub fn run(args: &RunArgs) -> Result<()> {
    let cfg = config::resolve(args)?;
    let labeled = labeled_input(&cfg)?;
    let scores = sweep_parameters(&labeled, &cfg.sweep.adm, &cfg.sweep.network, &cfg.chain())
        .context("sweep stage")?;
    config::create_dir(&cfg.out)?;
    config::write_json(&cfg.out.join("sweep.json"), &scores)?;
    config::write_manifest(&cfg.out, "sweep", &cfg)?;
    println!("rank adm net hits false_hits");
    for (rank, s) in scores.iter().enumerate() {
        println!(
            "{:>4} {:>3} {:>3} {}/{} {}/{}",
            rank + 1,
            s.adm_index,
            s.network_index,
            s.hits,
            s.labeled,
            s.false_hits,
            s.controls
        );
    }
    Ok(())
}
