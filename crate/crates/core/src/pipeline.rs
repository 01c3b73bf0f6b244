//! Per-channel detection chain: band-pass filtering, baseline-adapted delta
//! modulation, SNN simulation, and event extraction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adm::{
    compute_baseline, encode, AdmConfig, ReferenceUpdate, SpikeTrain, DEFAULT_AMPLIFIER_GAIN,
    DEFAULT_REFRACTORY_S,
};
use crate::analytics::{detect_hfos_with, HfoEvent, DEFAULT_MERGE_WINDOW_S};
use crate::error::{Error, Result};
use crate::filters::{design_bandpass, BandSpec};
use crate::signal_io::Recording;
use crate::snn::{
    disable_outliers, simulate, NetworkParams, OutputRaster, DEFAULT_OUTLIER_RATE_HZ,
};

/// How encoder thresholds are chosen for each (channel, band) stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// `scale ×` the baseline of the amplified band signal.
    Baseline { scale: f64 },
    /// Fixed thresholds in amplified units.
    Fixed { v_tu_uv: f64, v_td_uv: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdmSettings {
    pub threshold: ThresholdRule,
    pub refractory_s: f64,
    pub amplifier_gain: f64,
    pub reference_update: ReferenceUpdate,
}

impl Default for AdmSettings {
    fn default() -> Self {
        AdmSettings {
            threshold: ThresholdRule::Baseline { scale: 1.0 },
            refractory_s: DEFAULT_REFRACTORY_S,
            amplifier_gain: DEFAULT_AMPLIFIER_GAIN,
            reference_update: ReferenceUpdate::default(),
        }
    }
}

impl AdmSettings {
    pub fn with_baseline_scale(scale: f64) -> Self {
        AdmSettings {
            threshold: ThresholdRule::Baseline { scale },
            ..Default::default()
        }
    }

    /// Encoder configuration for a stream whose amplified baseline is
    /// `baseline`.
    pub fn config_for(&self, baseline: f64) -> Result<AdmConfig> {
        let (v_tu_uv, v_td_uv) = match self.threshold {
            ThresholdRule::Baseline { scale } => {
                let c = crate::adm::thresholds_from_baseline_scaled(baseline, scale)?;
                (c.v_tu_uv, c.v_td_uv)
            }
            ThresholdRule::Fixed { v_tu_uv, v_td_uv } => (v_tu_uv, v_td_uv),
        };
        let c = AdmConfig {
            v_tu_uv,
            v_td_uv,
            refractory_s: self.refractory_s,
            amplifier_gain: self.amplifier_gain,
            reference_update: self.reference_update,
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectionSettings {
    pub merge_window_ms: f64,
    pub min_event_span_ms: f64,
    pub outlier_rate_hz: f64,
}

impl Default for DetectionSettings {
    fn default() -> Self {
        DetectionSettings {
            merge_window_ms: DEFAULT_MERGE_WINDOW_S * 1e3,
            min_event_span_ms: 0.0,
            outlier_rate_hz: DEFAULT_OUTLIER_RATE_HZ,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Bands {
    pub ripple: BandSpec,
    pub fast_ripple: BandSpec,
}

impl Default for Bands {
    fn default() -> Self {
        Bands {
            ripple: BandSpec::ripple(),
            fast_ripple: BandSpec::fast_ripple(),
        }
    }
}

/// Everything the per-channel chain needs besides the network itself.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainSettings {
    pub bands: Bands,
    pub adm: AdmSettings,
    pub detection: DetectionSettings,
}

/// The four SNN input streams of one channel, plus the baselines used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelEncoding {
    pub channel: String,
    pub ripple_baseline: f64,
    pub fast_ripple_baseline: f64,
    /// `[R_UP, R_DN, FR_UP, FR_DN]`.
    pub trains: Vec<SpikeTrain>,
}

fn encode_band(
    samples: &[f64],
    fs: f64,
    channel: &str,
    band: &BandSpec,
    adm: &AdmSettings,
) -> Result<(f64, SpikeTrain, SpikeTrain)> {
    let coeffs = design_bandpass(band, fs)?;
    let filtered = coeffs.filter().run(samples);
    // baseline of the signal as the comparators see it
    let amplified: Vec<f64> = filtered.iter().map(|v| v * adm.amplifier_gain).collect();
    let baseline = compute_baseline(&amplified, fs)?;
    let config = adm.config_for(baseline)?;
    let (up, dn) = encode(&filtered, fs, &config, channel, band.name)?;
    Ok((baseline, up, dn))
}

pub fn encode_channel(
    samples: &[f64],
    fs: f64,
    channel: &str,
    settings: &ChainSettings,
) -> Result<ChannelEncoding> {
    let (rb, r_up, r_dn) =
        encode_band(samples, fs, channel, &settings.bands.ripple, &settings.adm)?;
    let (fb, f_up, f_dn) = encode_band(
        samples,
        fs,
        channel,
        &settings.bands.fast_ripple,
        &settings.adm,
    )?;
    Ok(ChannelEncoding {
        channel: channel.to_string(),
        ripple_baseline: rb,
        fast_ripple_baseline: fb,
        trains: vec![r_up, r_dn, f_up, f_dn],
    })
}

/// Encodes all channels in parallel, preserving channel order.
pub fn encode_recording(
    recording: &Recording,
    settings: &ChainSettings,
) -> Result<Vec<ChannelEncoding>> {
    let fs = recording.sample_rate_hz();
    recording
        .channels()
        .par_iter()
        .zip(recording.samples().par_iter())
        .map(|(label, samples)| encode_channel(samples, fs, label, settings))
        .collect()
}

pub fn simulate_encodings(
    params: &NetworkParams,
    encodings: &[ChannelEncoding],
    duration_s: f64,
) -> Result<Vec<OutputRaster>> {
    encodings
        .iter()
        .map(|e| simulate(params, &e.trains, duration_s))
        .collect()
}

/// Disables neurons that fire above `max_rate_hz` on any calibration channel.
pub fn calibrate(
    params: &NetworkParams,
    calibration: &[(Vec<ChannelEncoding>, f64)],
    max_rate_hz: f64,
) -> Result<NetworkParams> {
    let mut rasters = Vec::new();
    for (encodings, duration) in calibration {
        rasters.extend(simulate_encodings(params, encodings, *duration)?);
    }
    let refs: Vec<&OutputRaster> = rasters.iter().collect();
    Ok(disable_outliers(params, &refs, max_rate_hz))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDetections {
    pub channel: String,
    pub ripple_baseline: f64,
    pub fast_ripple_baseline: f64,
    pub input_spikes: [usize; 4],
    pub output_spikes: usize,
    pub events: Vec<HfoEvent>,
}

pub fn detect_encodings(
    params: &NetworkParams,
    encodings: &[ChannelEncoding],
    duration_s: f64,
    detection: &DetectionSettings,
) -> Result<Vec<ChannelDetections>> {
    let rasters = simulate_encodings(params, encodings, duration_s)?;
    detections_from_rasters(params, encodings, &rasters, detection)
}

/// Event extraction from rasters simulated earlier, possibly before
/// calibration. Rows of neurons disabled in `params` are ignored.
pub fn detections_from_rasters(
    params: &NetworkParams,
    encodings: &[ChannelEncoding],
    rasters: &[OutputRaster],
    detection: &DetectionSettings,
) -> Result<Vec<ChannelDetections>> {
    if rasters.len() != encodings.len() {
        return Err(Error::InvalidInput(format!(
            "{} rasters for {} channels",
            rasters.len(),
            encodings.len()
        )));
    }
    Ok(encodings
        .iter()
        .zip(rasters)
        .map(|(e, raster)| {
            let mut raster = raster.clone();
            for (row, n) in raster.spikes.iter_mut().zip(&params.neurons) {
                if !n.enabled {
                    row.clear();
                }
            }
            let events = detect_hfos_with(
                &raster,
                &e.channel,
                detection.merge_window_ms * 1e-3,
                detection.min_event_span_ms * 1e-3,
            );
            let n = |i: usize| e.trains.get(i).map_or(0, SpikeTrain::len);
            ChannelDetections {
                channel: e.channel.clone(),
                ripple_baseline: e.ripple_baseline,
                fast_ripple_baseline: e.fast_ripple_baseline,
                input_spikes: [n(0), n(1), n(2), n(3)],
                output_spikes: raster.total_spikes(),
                events,
            }
        })
        .collect())
}

/// Full chain on one recording with an already calibrated network.
pub fn detect_recording(
    recording: &Recording,
    params: &NetworkParams,
    settings: &ChainSettings,
) -> Result<Vec<ChannelDetections>> {
    let enc = encode_recording(recording, settings)?;
    detect_encodings(params, &enc, recording.duration_s(), &settings.detection)
}
