//! `detect`: the full chain over every interval of every patient.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hfo_core::adm::write_spike_csv;
use hfo_core::analytics::{hfo_area, hfo_rate, mean_rates, test_retest};
use hfo_core::pipeline::{
    detections_from_rasters, encode_recording, simulate_encodings, ChannelDetections,
    ChannelEncoding,
};
use hfo_core::signal_io::{load_recording, synthesize_ieeg};
use hfo_core::snn::{disable_outliers, sample_network};
use hfo_core::{HfoVector, NetworkParams, OutputRaster, Recording, RecordingFormat};
use rayon::prelude::*;

use crate::config::{self, RunArgs, RunConfig};
use crate::failure;
use crate::model::{
    file_stem, mean_sem, ChannelRate, IntervalChannel, IntervalReport, PatientReport,
};

const DEFAULT_PATIENT: &str = "patient";
const SYNTH_PATIENT: &str = "synthetic";

pub struct Interval {
    pub patient_id: String,
    pub interval_id: String,
    pub recording: Recording,
}

impl Interval {
    fn label(&self) -> String {
        format!("patient {} interval {}", self.patient_id, self.interval_id)
    }
}

fn interval(recording: Recording, patient: &str, interval: &str) -> Interval {
    let or = |s: &str, d: &str| {
        if s.is_empty() {
            d.to_string()
        } else {
            s.to_string()
        }
    };
    Interval {
        patient_id: or(&recording.patient_id, patient),
        interval_id: or(&recording.interval_id, interval),
        recording,
    }
}

/// Loads every input, sorted by (patient, interval).
pub fn load_inputs(cfg: &RunConfig) -> Result<Vec<Interval>> {
    let mut out = Vec::new();
    if cfg.inputs.is_empty() {
        if let Some(spec) = &cfg.synth {
            let (rec, _) = synthesize_ieeg(spec).context("synthesis stage")?;
            out.push(interval(rec, SYNTH_PATIENT, "I1"));
        }
    }
    for path in &cfg.inputs {
        let rec = load_recording(path, RecordingFormat::from_path(path))
            .with_context(|| format!("load stage, {}", path.display()))?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        out.push(interval(rec, DEFAULT_PATIENT, &stem));
    }
    out.sort_by(|a, b| (&a.patient_id, &a.interval_id).cmp(&(&b.patient_id, &b.interval_id)));
    for w in out.windows(2) {
        if (&w[0].patient_id, &w[0].interval_id) == (&w[1].patient_id, &w[1].interval_id) {
            return Err(failure::data(format!("{} appears twice", w[0].label())));
        }
    }
    Ok(out)
}

pub struct IntervalResult {
    pub encodings: Vec<ChannelEncoding>,
    pub rasters: Vec<OutputRaster>,
    pub detections: Vec<ChannelDetections>,
}

pub struct Analysis {
    pub network: NetworkParams,
    pub intervals: Vec<IntervalResult>,
    pub reports: Vec<PatientReport>,
}

fn calibration_set(
    cfg: &RunConfig,
    network: &NetworkParams,
    rasters: &[Vec<OutputRaster>],
) -> Result<NetworkParams> {
    let cutoff = cfg.detection.outlier_rate_hz;
    let Some(path) = &cfg.calibration else {
        let all: Vec<&OutputRaster> = rasters.iter().flatten().collect();
        return Ok(disable_outliers(network, &all, cutoff));
    };
    let rec = load_recording(path, RecordingFormat::from_path(path))
        .with_context(|| format!("load stage, calibration {}", path.display()))?;
    let enc = encode_recording(&rec, &cfg.chain()).context("encoding stage, calibration")?;
    let cal = simulate_encodings(network, &enc, rec.duration_s())
        .context("simulation stage, calibration")?;
    Ok(disable_outliers(
        network,
        &cal.iter().collect::<Vec<_>>(),
        cutoff,
    ))
}

fn check_events(iv: &Interval, dets: &[ChannelDetections], merge_window_s: f64) -> Result<()> {
    let dur = iv.recording.duration_s();
    for d in dets {
        let bad = d
            .events
            .iter()
            .any(|e| !(0.0 <= e.start_s && e.start_s <= e.end_s && e.end_s <= dur))
            || d.events
                .windows(2)
                .any(|w| w[1].start_s - w[0].end_s < merge_window_s);
        if bad {
            return Err(failure::invariant(format!(
                "{} channel {}: events are unordered, overlapping or out of range",
                iv.label(),
                d.channel
            )));
        }
    }
    Ok(())
}

fn patient_report(
    cfg: &RunConfig,
    network: &NetworkParams,
    group: &[(&Interval, &IntervalResult)],
) -> Result<PatientReport> {
    let (first, _) = group[0];
    let channels = first.recording.channels().to_vec();
    let gain = cfg.adm.amplifier_gain;
    let mut intervals = Vec::new();
    let mut vectors = Vec::new();
    for (iv, res) in group {
        if iv.recording.channels() != channels.as_slice() {
            return Err(failure::data(format!(
                "{} has channels {:?}, expected {:?}",
                iv.label(),
                iv.recording.channels(),
                channels
            )));
        }
        let dur = iv.recording.duration_s();
        let mut rows = Vec::new();
        for d in &res.detections {
            rows.push(IntervalChannel {
                channel: d.channel.clone(),
                events: d.events.len(),
                rate_per_min: hfo_rate(d.events.len(), dur)?,
                ripple_baseline_uv: d.ripple_baseline / gain,
                fast_ripple_baseline_uv: d.fast_ripple_baseline / gain,
                input_spikes: d.input_spikes,
                output_spikes: d.output_spikes,
            });
        }
        vectors.push(HfoVector::new(
            iv.interval_id.clone(),
            channels.clone(),
            rows.iter().map(|r| r.rate_per_min).collect(),
        )?);
        intervals.push(IntervalReport {
            interval_id: iv.interval_id.clone(),
            duration_s: dur,
            channels: rows,
        });
    }
    let rates = channels
        .iter()
        .enumerate()
        .map(|(c, ch)| {
            let per: Vec<f64> = vectors.iter().map(|v| v.rates_per_min[c]).collect();
            let (mean_per_min, sem_per_min) = mean_sem(&per);
            ChannelRate {
                channel: ch.clone(),
                mean_per_min,
                sem_per_min,
            }
        })
        .collect();
    let test_retest = if vectors.len() >= 2 {
        let t = test_retest(&vectors)?;
        if !(0.0..=1.0).contains(&t.score) {
            return Err(failure::invariant(format!(
                "test-retest score {} is outside [0, 1]",
                t.score
            )));
        }
        Some(t)
    } else {
        None
    };
    Ok(PatientReport {
        patient_id: first.patient_id.clone(),
        channels,
        enabled_neurons: network.enabled_count(),
        intervals,
        rates,
        test_retest,
        hfo_area: hfo_area(&mean_rates(&vectors)?),
        classification: None,
    })
}

/// Encodes and simulates in parallel, calibrates, then extracts events and
/// builds one report per patient.
pub fn analyze(cfg: &RunConfig, intervals: &[Interval]) -> Result<Analysis> {
    let chain = cfg.chain();
    let network = sample_network(&cfg.network).context("network stage")?;
    let encodings: Vec<Vec<ChannelEncoding>> = intervals
        .par_iter()
        .map(|iv| {
            encode_recording(&iv.recording, &chain)
                .with_context(|| format!("encoding stage, {}", iv.label()))
        })
        .collect::<Result<_>>()?;
    let rasters: Vec<Vec<OutputRaster>> = intervals
        .par_iter()
        .zip(encodings.par_iter())
        .map(|(iv, enc)| {
            simulate_encodings(&network, enc, iv.recording.duration_s())
                .with_context(|| format!("simulation stage, {}", iv.label()))
        })
        .collect::<Result<_>>()?;
    let network = calibration_set(cfg, &network, &rasters)?;
    let mut results = Vec::new();
    for ((iv, enc), ras) in intervals.iter().zip(encodings).zip(rasters) {
        let detections = detections_from_rasters(&network, &enc, &ras, &cfg.detection)
            .with_context(|| format!("detection stage, {}", iv.label()))?;
        check_events(iv, &detections, cfg.detection.merge_window_ms * 1e-3)?;
        results.push(IntervalResult {
            encodings: enc,
            rasters: ras,
            detections,
        });
    }
    let mut reports = Vec::new();
    let paired: Vec<(&Interval, &IntervalResult)> = intervals.iter().zip(&results).collect();
    for group in paired.chunk_by(|a, b| a.0.patient_id == b.0.patient_id) {
        reports.push(patient_report(cfg, &network, group).context("analytics stage")?);
    }
    Ok(Analysis {
        network,
        intervals: results,
        reports,
    })
}

fn events_csv(dets: &[ChannelDetections]) -> String {
    let mut s = String::from("channel,start_s,end_s,neuron_count\n");
    for d in dets {
        for e in &d.events {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                e.channel, e.start_s, e.end_s, e.neuron_count
            );
        }
    }
    s
}

fn masked(raster: &OutputRaster, network: &NetworkParams) -> OutputRaster {
    let mut r = raster.clone();
    for (row, n) in r.spikes.iter_mut().zip(&network.neurons) {
        if !n.enabled {
            row.clear();
        }
    }
    r
}

fn interval_dir(out: &Path, kind: &str, iv: &Interval) -> Result<PathBuf> {
    let dir = out.join(kind).join(file_stem(&iv.patient_id));
    config::create_dir(&dir)?;
    Ok(dir)
}

/// Writes every output single-threaded in (patient, interval, channel) order.
pub fn write_outputs(cfg: &RunConfig, intervals: &[Interval], analysis: &Analysis) -> Result<()> {
    let out = &cfg.out;
    config::create_dir(out)?;
    for (iv, res) in intervals.iter().zip(&analysis.intervals) {
        let name = file_stem(&iv.interval_id);
        let path = interval_dir(out, "events", iv)?.join(format!("{name}.csv"));
        fs::write(&path, events_csv(&res.detections))
            .with_context(|| format!("writing {}", path.display()))?;
        if cfg.dump_spikes {
            let trains: Vec<_> = res.encodings.iter().flat_map(|e| &e.trains).collect();
            write_spike_csv(
                interval_dir(out, "spikes", iv)?.join(format!("{name}.csv")),
                &trains,
            )?;
            let dir = interval_dir(out, "rasters", iv)?.join(&name);
            config::create_dir(&dir)?;
            for (enc, r) in res.encodings.iter().zip(&res.rasters) {
                masked(r, &analysis.network)
                    .write_csv(dir.join(format!("{}.csv", file_stem(&enc.channel))))?;
            }
        }
    }
    let reports = out.join("reports");
    config::create_dir(&reports)?;
    for r in &analysis.reports {
        config::write_json(
            &reports.join(format!("{}.json", file_stem(&r.patient_id))),
            r,
        )?;
    }
    config::write_manifest(out, "detect", cfg)
}

pub fn run(args: &RunArgs) -> Result<()> {
    let cfg = config::resolve(args)?;
    let intervals = load_inputs(&cfg)?;
    let analysis = analyze(&cfg, &intervals)?;
    write_outputs(&cfg, &intervals, &analysis)?;
    println!(
        "{} of {} neurons enabled after calibration",
        analysis.network.enabled_count(),
        analysis.network.len()
    );
    for r in &analysis.reports {
        let events: usize = r
            .intervals
            .iter()
            .flat_map(|i| &i.channels)
            .map(|c| c.events)
            .sum();
        let retest = r
            .test_retest
            .as_ref()
            .map_or("--".to_string(), |t| format!("{:.2}", t.score));
        println!(
            "patient {}: {} intervals, {} events, test-retest {}, HFO area [{}]",
            r.patient_id,
            r.intervals.len(),
            events,
            retest,
            r.hfo_area.join(", ")
        );
    }
    println!("outputs in {}", cfg.out.display());
    Ok(())
}
