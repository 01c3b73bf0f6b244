//! Run configuration: defaults, JSON file, then command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hfo_core::pipeline::Bands;
use hfo_core::snn::DEFAULT_SEED;
use hfo_core::{AdmSettings, ChainSettings, DetectionSettings, NetworkConfig, SynthSpec};
use serde::{Deserialize, Serialize};

use crate::failure;

pub const DEFAULT_OUT: &str = "hfo-out";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Candidate settings for `sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub adm: Vec<AdmSettings>,
    pub network: Vec<NetworkConfig>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            adm: [0.5, 1.0, 2.0]
                .map(AdmSettings::with_baseline_scale)
                .to_vec(),
            network: vec![NetworkConfig::default()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seeds the network sampler, synthetic input and every sweep network.
    pub seed: u64,
    pub out: PathBuf,
    /// Recording files, CSV or binary by extension.
    pub inputs: Vec<PathBuf>,
    /// Synthetic input used when `inputs` is empty.
    pub synth: Option<SynthSpec>,
    /// HFO-free recording for outlier disabling; the inputs are used if unset.
    pub calibration: Option<PathBuf>,
    /// Labeled events for `sweep`.
    pub annotations: Option<PathBuf>,
    pub bands: Bands,
    pub adm: AdmSettings,
    pub detection: DetectionSettings,
    pub network: NetworkConfig,
    pub sweep: SweepGrid,
    /// Also write encoder spikes and output rasters.
    pub dump_spikes: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            out: PathBuf::from(DEFAULT_OUT),
            inputs: Vec::new(),
            synth: None,
            calibration: None,
            annotations: None,
            bands: Bands::default(),
            adm: AdmSettings::default(),
            detection: DetectionSettings::default(),
            network: NetworkConfig::default(),
            sweep: SweepGrid::default(),
            dump_spikes: false,
        }
    }
}

impl RunConfig {
    pub fn chain(&self) -> ChainSettings {
        ChainSettings {
            bands: self.bands.clone(),
            adm: self.adm,
            detection: self.detection,
        }
    }
}

fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LOW:HIGH in Hz, got {s:?}"))?;
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| format!("{v:?} is not a number"))
    };
    Ok((num(lo)?, num(hi)?))
}

/// Flags shared by `detect` and `sweep`.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Ripple band edges, LOW:HIGH in Hz.
    #[arg(long, value_parser = parse_band, value_name = "LOW:HIGH")]
    pub ripple: Option<(f64, f64)>,
    /// Fast-ripple band edges, LOW:HIGH in Hz.
    #[arg(long, value_parser = parse_band, value_name = "LOW:HIGH")]
    pub fast_ripple: Option<(f64, f64)>,
    #[arg(long)]
    pub merge_window_ms: Option<f64>,
    /// Neurons firing faster than this on the calibration data are disabled.
    #[arg(long)]
    pub outlier_hz: Option<f64>,
    /// Recording file; repeat for several intervals. Replaces the configured inputs.
    #[arg(long = "input", value_name = "PATH")]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    #[arg(long)]
    pub dump_spikes: bool,
}

fn read_file(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| failure::config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| failure::config(format!("config {}: {e}", path.display())))
}

/// Resolves defaults, the config file and flags, in increasing precedence.
pub fn resolve(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => read_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    if let Some((lo, hi)) = args.ripple {
        cfg.bands.ripple.low_hz = lo;
        cfg.bands.ripple.high_hz = hi;
    }
    if let Some((lo, hi)) = args.fast_ripple {
        cfg.bands.fast_ripple.low_hz = lo;
        cfg.bands.fast_ripple.high_hz = hi;
    }
    if let Some(w) = args.merge_window_ms {
        cfg.detection.merge_window_ms = w;
    }
    if let Some(r) = args.outlier_hz {
        cfg.detection.outlier_rate_hz = r;
    }
    if !args.inputs.is_empty() {
        cfg.inputs = args.inputs.clone();
    }
    if let Some(c) = &args.calibration {
        cfg.calibration = Some(c.clone());
    }
    if let Some(a) = &args.annotations {
        cfg.annotations = Some(a.clone());
    }
    cfg.dump_spikes |= args.dump_spikes;

    cfg.network.seed = cfg.seed;
    if let Some(s) = &mut cfg.synth {
        s.seed = cfg.seed;
    }
    for n in &mut cfg.sweep.network {
        n.seed = cfg.seed;
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<()> {
    if cfg.inputs.is_empty() && cfg.synth.is_none() {
        return Err(failure::config(
            "no input: give --input or a synth spec in the config",
        ));
    }
    let files = cfg
        .inputs
        .iter()
        .chain(&cfg.calibration)
        .chain(&cfg.annotations);
    for p in files {
        if !p.is_file() {
            return Err(failure::config(format!("{} does not exist", p.display())));
        }
    }
    for b in [&cfg.bands.ripple, &cfg.bands.fast_ripple] {
        if !(b.low_hz > 0.0 && b.low_hz < b.high_hz && b.high_hz.is_finite()) {
            return Err(failure::config(format!(
                "{:?} band [{}, {}] Hz must satisfy 0 < low < high",
                b.name, b.low_hz, b.high_hz
            )));
        }
    }
    let d = &cfg.detection;
    if !(d.merge_window_ms >= 0.0 && d.merge_window_ms.is_finite()) {
        return Err(failure::config(format!(
            "merge window {} ms must be non-negative",
            d.merge_window_ms
        )));
    }
    if !(d.min_event_span_ms >= 0.0 && d.min_event_span_ms.is_finite()) {
        return Err(failure::config(format!(
            "minimum event span {} ms must be non-negative",
            d.min_event_span_ms
        )));
    }
    if !(d.outlier_rate_hz > 0.0) {
        return Err(failure::config(format!(
            "outlier cutoff {} Hz must be positive",
            d.outlier_rate_hz
        )));
    }
    cfg.adm.config_for(1.0).map_err(failure::as_config)?;
    cfg.network.validate().map_err(failure::as_config)?;
    for a in &cfg.sweep.adm {
        a.config_for(1.0)
            .map_err(failure::as_config)
            .context("sweep grid")?;
    }
    for n in &cfg.sweep.network {
        n.validate()
            .map_err(failure::as_config)
            .context("sweep grid")?;
    }
    if let Some(s) = &cfg.synth {
        s.validate()
            .map_err(failure::as_config)
            .context("synth spec")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a, T: Serialize> {
    command: &'a str,
    version: &'a str,
    config: &'a T,
}

/// Records the fully resolved configuration next to the outputs.
pub fn write_manifest<T: Serialize>(out: &Path, command: &str, config: &T) -> Result<()> {
    let m = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config,
    };
    write_json(&out.join(MANIFEST_FILE), &m)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).context("serializing output")?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}
