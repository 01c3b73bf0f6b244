//! Asynchronous delta modulation: baseline estimation, threshold selection,
//! UP/DN spike encoding, and staircase reconstruction.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::BandName;

pub const BASELINE_WINDOW_S: f64 = 0.05;
pub const BASELINE_WINDOWS: usize = 20;
pub const BASELINE_SPAN_S: f64 = BASELINE_WINDOW_S * BASELINE_WINDOWS as f64;

pub const DEFAULT_REFRACTORY_S: f64 = 300e-6;
pub const DEFAULT_AMPLIFIER_GAIN: f64 = 8.0;
const MAX_REFRACTORY_S: f64 = 0.01;

/// Mean of the lowest quartile of per-window peak magnitudes over the first
/// `windows` windows of `window_len` samples.
pub(crate) fn lowest_quartile_window_peak(x: &[f64], window_len: usize, windows: usize) -> f64 {
    let mut peaks: Vec<f64> = x
        .chunks_exact(window_len)
        .take(windows)
        .map(|w| w.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
        .collect();
    peaks.sort_by(f64::total_cmp);
    let q = (peaks.len() / 4).max(1);
    peaks[..q].iter().sum::<f64>() / q as f64
}

/// Noise-floor estimate from the first second of a channel: peak `|x|` over
/// 20 non-overlapping 50 ms windows, then the mean of the 5 smallest peaks.
pub fn compute_baseline(signal: &[f64], sample_rate_hz: f64) -> Result<f64> {
    let window_len = (BASELINE_WINDOW_S * sample_rate_hz).round() as usize;
    let need = window_len * BASELINE_WINDOWS;
    if window_len == 0 || signal.len() < need {
        return Err(Error::SignalTooShort {
            got_s: signal.len() as f64 / sample_rate_hz,
            need_s: BASELINE_SPAN_S,
        });
    }
    Ok(lowest_quartile_window_peak(
        &signal[..need],
        window_len,
        BASELINE_WINDOWS,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Polarity {
    Up,
    Dn,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Up => "UP",
            Polarity::Dn => "DN",
        })
    }
}

/// How the modulator's reference moves when it fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceUpdate {
    /// Reference moves by exactly one threshold per spike, so the decoded
    /// staircase stays within one threshold of the input.
    #[default]
    StepByThreshold,
    /// Reference snaps to the current input, like the circuit's amplifier
    /// reset. Overshoot between samples is lost to the decoder.
    SnapToSignal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmConfig {
    /// UP threshold, compared against the amplified signal.
    pub v_tu_uv: f64,
    /// DN threshold magnitude, compared against the amplified signal.
    pub v_td_uv: f64,
    pub refractory_s: f64,
    pub amplifier_gain: f64,
    #[serde(default)]
    pub reference_update: ReferenceUpdate,
}

impl AdmConfig {
    pub fn symmetric(threshold_uv: f64) -> Self {
        AdmConfig {
            v_tu_uv: threshold_uv,
            v_td_uv: threshold_uv,
            refractory_s: DEFAULT_REFRACTORY_S,
            amplifier_gain: DEFAULT_AMPLIFIER_GAIN,
            reference_update: ReferenceUpdate::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidAdmConfig(m));
        if !(self.v_tu_uv > 0.0 && self.v_td_uv > 0.0) {
            return bad(format!(
                "thresholds must be positive ({}, {})",
                self.v_tu_uv, self.v_td_uv
            ));
        }
        if !(0.0..MAX_REFRACTORY_S).contains(&self.refractory_s) {
            return bad(format!(
                "refractory {} s must lie in [0, 10 ms)",
                self.refractory_s
            ));
        }
        if !(self.amplifier_gain > 0.0 && self.amplifier_gain.is_finite()) {
            return bad(format!(
                "amplifier gain {} must be positive",
                self.amplifier_gain
            ));
        }
        Ok(())
    }

    /// Largest reconstruction error the decoder guarantees, in input units.
    pub fn reconstruction_bound(&self) -> f64 {
        self.v_tu_uv.max(self.v_td_uv) / self.amplifier_gain
    }
}

/// Thresholds equal to the baseline (scale 1).
pub fn thresholds_from_baseline(baseline_uv: f64) -> Result<AdmConfig> {
    thresholds_from_baseline_scaled(baseline_uv, 1.0)
}

pub fn thresholds_from_baseline_scaled(baseline_uv: f64, scale: f64) -> Result<AdmConfig> {
    if !(baseline_uv > 0.0) || !baseline_uv.is_finite() {
        return Err(Error::NonPositiveBaseline(baseline_uv));
    }
    if !(scale > 0.0) {
        return Err(Error::InvalidAdmConfig(format!(
            "threshold scale {scale} must be positive"
        )));
    }
    Ok(AdmConfig::symmetric(baseline_uv * scale))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrain {
    pub polarity: Polarity,
    pub channel: String,
    pub band: BandName,
    times_s: Vec<f64>,
}

impl SpikeTrain {
    pub fn new(
        polarity: Polarity,
        channel: impl Into<String>,
        band: BandName,
        times_s: Vec<f64>,
    ) -> Result<Self> {
        if let Some(i) = times_s.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(Error::UnsortedSpikes { index: i + 1 });
        }
        Ok(SpikeTrain {
            polarity,
            channel: channel.into(),
            band,
            times_s,
        })
    }

    pub fn empty(polarity: Polarity, channel: impl Into<String>, band: BandName) -> Self {
        SpikeTrain {
            polarity,
            channel: channel.into(),
            band,
            times_s: Vec::new(),
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times_s
    }

    pub fn len(&self) -> usize {
        self.times_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_s.is_empty()
    }
}

/// Delta-modulate one filtered channel. The signal is amplified by
/// `amplifier_gain`, the reference starts at the first amplified sample, and
/// after any spike both polarities are muted for `refractory_s`.
pub fn encode(
    signal: &[f64],
    sample_rate_hz: f64,
    config: &AdmConfig,
    channel: &str,
    band: BandName,
) -> Result<(SpikeTrain, SpikeTrain)> {
    config.validate()?;
    let mut up = Vec::new();
    let mut dn = Vec::new();
    let Some(first) = signal.first() else {
        return Ok((
            SpikeTrain::empty(Polarity::Up, channel, band),
            SpikeTrain::empty(Polarity::Dn, channel, band),
        ));
    };
    let gain = config.amplifier_gain;
    let mut reference = first * gain;
    // Sample index of the most recent spike.
    let mut last: Option<usize> = None;
    // Small slack so a refractory period that is an exact multiple of the
    // sample period is not lost to rounding.
    let refractory_samples = config.refractory_s * sample_rate_hz - 1e-9;

    for (i, x) in signal.iter().enumerate().skip(1) {
        if let Some(l) = last {
            if ((i - l) as f64) < refractory_samples {
                continue;
            }
        }
        let v = x * gain;
        let polarity = if v - reference > config.v_tu_uv {
            Polarity::Up
        } else if reference - v > config.v_td_uv {
            Polarity::Dn
        } else {
            continue;
        };
        let t = i as f64 / sample_rate_hz;
        match (polarity, config.reference_update) {
            (Polarity::Up, ReferenceUpdate::StepByThreshold) => reference += config.v_tu_uv,
            (Polarity::Dn, ReferenceUpdate::StepByThreshold) => reference -= config.v_td_uv,
            (_, ReferenceUpdate::SnapToSignal) => reference = v,
        }
        match polarity {
            Polarity::Up => up.push(t),
            Polarity::Dn => dn.push(t),
        }
        last = Some(i);
    }
    Ok((
        SpikeTrain::new(Polarity::Up, channel, band, up)?,
        SpikeTrain::new(Polarity::Dn, channel, band, dn)?,
    ))
}

/// Piecewise-constant reconstruction: `levels[i]` holds on
/// `[step_times[i], step_times[i + 1])`, and the value before the first step
/// is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Staircase {
    pub duration_s: f64,
    pub step_times: Vec<f64>,
    pub levels: Vec<f64>,
}

impl Staircase {
    pub fn value_at(&self, t: f64) -> f64 {
        // index of the last step with time <= t
        let n = self.step_times.partition_point(|s| *s <= t);
        if n == 0 {
            0.0
        } else {
            self.levels[n - 1]
        }
    }

    /// Values at `i / sample_rate_hz` for `i in 0..n`.
    pub fn sample(&self, sample_rate_hz: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| self.value_at(i as f64 / sample_rate_hz))
            .collect()
    }
}

pub fn decode(
    up: &SpikeTrain,
    dn: &SpikeTrain,
    config: &AdmConfig,
    duration_s: f64,
) -> Result<Staircase> {
    let mut events: Vec<(f64, f64)> = up
        .times()
        .iter()
        .map(|t| (*t, config.v_tu_uv))
        .chain(dn.times().iter().map(|t| (*t, -config.v_td_uv)))
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(i) = events.windows(2).position(|w| !(w[0].0 < w[1].0)) {
        return Err(Error::UnsortedSpikes { index: i + 1 });
    }
    let mut level = 0.0;
    let mut step_times = Vec::with_capacity(events.len());
    let mut levels = Vec::with_capacity(events.len());
    for (t, delta) in events {
        level += delta;
        step_times.push(t);
        levels.push(level / config.amplifier_gain);
    }
    Ok(Staircase {
        duration_s,
        step_times,
        levels,
    })
}

/// Spike trains as CSV rows `time_s,polarity,channel,band`, ordered by time
/// and then by input order.
pub fn write_spike_csv(path: impl AsRef<Path>, trains: &[&SpikeTrain]) -> Result<()> {
    let path = path.as_ref();
    let mut rows: Vec<(f64, usize, &SpikeTrain)> = trains
        .iter()
        .enumerate()
        .flat_map(|(k, tr)| tr.times().iter().map(move |t| (*t, k, *tr)))
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out = String::from("time_s,polarity,channel,band\n");
    for (t, _, tr) in rows {
        out.push_str(&format!("{t},{},{},{}\n", tr.polarity, tr.channel, tr.band));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
