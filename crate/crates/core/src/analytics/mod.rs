//! From output rasters to clinical quantities: HFO events and rates,
//! test-retest reliability of rate vectors, HFO-area delineation, and
//! outcome-prediction metrics.

mod sweep;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::snn::OutputRaster;

pub use sweep::{sweep_parameters, LabeledRecording, SweepScore, SNIPPET_MARGIN_S};

pub const DEFAULT_MERGE_WINDOW_S: f64 = 0.015;
pub const HFO_AREA_PERCENTILE: f64 = 95.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HfoEvent {
    pub channel: String,
    pub start_s: f64,
    pub end_s: f64,
    /// Distinct neurons that spiked within the event.
    pub neuron_count: usize,
}

/// Ensemble detection with the default 15 ms merge window.
pub fn detect_hfos(raster: &OutputRaster, channel: &str) -> Vec<HfoEvent> {
    detect_hfos_with(raster, channel, DEFAULT_MERGE_WINDOW_S, 0.0)
}

/// Pools every neuron's spikes and merges consecutive spikes closer than
/// `merge_window_s` (strictly) into one event spanning first to last spike.
/// Events shorter than `min_event_span_s` are dropped.
pub fn detect_hfos_with(
    raster: &OutputRaster,
    channel: &str,
    merge_window_s: f64,
    min_event_span_s: f64,
) -> Vec<HfoEvent> {
    let pooled = raster.pooled();
    let mut events = Vec::new();
    let mut i = 0;
    while i < pooled.len() {
        let start = pooled[i].0;
        let mut neurons = BTreeSet::from([pooled[i].1]);
        let mut j = i;
        while j + 1 < pooled.len() && pooled[j + 1].0 - pooled[j].0 < merge_window_s {
            j += 1;
            neurons.insert(pooled[j].1);
        }
        let end = pooled[j].0;
        if end - start >= min_event_span_s {
            events.push(HfoEvent {
                channel: channel.to_string(),
                start_s: start,
                end_s: end,
                neuron_count: neurons.len(),
            });
        }
        i = j + 1;
    }
    events
}

/// Merges time-sorted events whose gap is below `merge_window_s`. Applied to
/// the output of [`detect_hfos_with`] with the same window this is the
/// identity.
pub fn merge_events(events: &[HfoEvent], merge_window_s: f64) -> Vec<HfoEvent> {
    let mut out: Vec<HfoEvent> = Vec::with_capacity(events.len());
    for e in events {
        match out.last_mut() {
            Some(last) if last.channel == e.channel && e.start_s - last.end_s < merge_window_s => {
                last.end_s = last.end_s.max(e.end_s);
                last.neuron_count = last.neuron_count.max(e.neuron_count);
            }
            _ => out.push(e.clone()),
        }
    }
    out
}

/// Events per minute.
pub fn hfo_rate(event_count: usize, interval_duration_s: f64) -> Result<f64> {
    if !(interval_duration_s > 0.0) {
        return Err(Error::InvalidInput(format!(
            "interval duration {interval_duration_s} s must be positive"
        )));
    }
    Ok(event_count as f64 * 60.0 / interval_duration_s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HfoVector {
    pub interval_id: String,
    pub channels: Vec<String>,
    pub rates_per_min: Vec<f64>,
}

impl HfoVector {
    pub fn new(
        interval_id: impl Into<String>,
        channels: Vec<String>,
        rates_per_min: Vec<f64>,
    ) -> Result<Self> {
        if channels.len() != rates_per_min.len() {
            return Err(Error::ChannelMismatch(format!(
                "{} channels but {} rates",
                channels.len(),
                rates_per_min.len()
            )));
        }
        if rates_per_min.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::InvalidInput(
                "HFO rates must be finite and non-negative".into(),
            ));
        }
        Ok(HfoVector {
            interval_id: interval_id.into(),
            channels,
            rates_per_min,
        })
    }

    fn norm_sq(&self) -> f64 {
        self.rates_per_min.iter().map(|r| r * r).sum()
    }

    fn dot(&self, other: &HfoVector) -> f64 {
        self.rates_per_min
            .iter()
            .zip(&other.rates_per_min)
            .map(|(a, b)| a * b)
            .sum()
    }
}

fn check_same_channels(vectors: &[HfoVector]) -> Result<()> {
    if let Some(first) = vectors.first() {
        for v in &vectors[1..] {
            if v.channels != first.channels {
                return Err(Error::ChannelMismatch(format!(
                    "interval {:?} does not match channel order of {:?}",
                    v.interval_id, first.interval_id
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRetest {
    /// Mean pairwise cosine similarity, in `[0, 1]`.
    pub score: f64,
    pub pairs: usize,
    /// Pairs with an all-zero vector; they count as 0.
    pub zero_pairs: usize,
}

/// Mean cosine similarity over all unordered pairs of interval vectors.
pub fn test_retest(vectors: &[HfoVector]) -> Result<TestRetest> {
    if vectors.len() < 2 {
        return Err(Error::InvalidInput(
            "test-retest needs at least two intervals".into(),
        ));
    }
    check_same_channels(vectors)?;
    let norms: Vec<f64> = vectors.iter().map(HfoVector::norm_sq).collect();
    let (mut sum, mut pairs, mut zero_pairs) = (0.0, 0, 0);
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            pairs += 1;
            if norms[i] == 0.0 || norms[j] == 0.0 {
                zero_pairs += 1;
                continue;
            }
            // sqrt of the product keeps identical vectors at exactly 1
            let c = vectors[i].dot(&vectors[j]) / (norms[i] * norms[j]).sqrt();
            sum += c.clamp(0.0, 1.0);
        }
    }
    Ok(TestRetest {
        score: sum / pairs as f64,
        pairs,
        zero_pairs,
    })
}

/// Per-channel mean rate across intervals.
pub fn mean_rates(vectors: &[HfoVector]) -> Result<HfoVector> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::InvalidInput("no HFO vectors".into()))?;
    check_same_channels(vectors)?;
    let n = vectors.len() as f64;
    let rates = (0..first.channels.len())
        .map(|c| vectors.iter().map(|v| v.rates_per_min[c]).sum::<f64>() / n)
        .collect();
    HfoVector::new("mean", first.channels.clone(), rates)
}

/// Percentile with linear interpolation between order statistics
/// (rank `p/100 · (n-1)`).
pub fn percentile_linear(values: &[f64], p: f64) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    if s.is_empty() {
        return f64::NAN;
    }
    let rank = p / 100.0 * (s.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    s[lo] + (rank - lo as f64) * (s[hi] - s[lo])
}

/// Channels whose mean rate strictly exceeds the 95th percentile of the
/// channel rate distribution, in channel order.
pub fn hfo_area(mean_rates: &HfoVector) -> Vec<String> {
    let cut = percentile_linear(&mean_rates.rates_per_min, HFO_AREA_PERCENTILE);
    mean_rates
        .channels
        .iter()
        .zip(&mean_rates.rates_per_min)
        .filter(|(_, r)| **r > cut)
        .map(|(c, _)| c.clone())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    TN,
    TP,
    FN,
    FP,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Seizure freedom is ILAE class 1. An empty HFO area counts as contained.
pub fn classify_outcome<S: AsRef<str>>(area: &[S], resection: &[S], ilae: u8) -> Classification {
    let seizure_free = ilae == 1;
    let contained = area
        .iter()
        .all(|a| resection.iter().any(|r| r.as_ref() == a.as_ref()));
    match (contained, seizure_free) {
        (true, true) => Classification::TN,
        (true, false) => Classification::FN,
        (false, false) => Classification::TP,
        (false, true) => Classification::FP,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub patient_id: String,
    pub hfo_area: Vec<String>,
    pub resection: Vec<String>,
    pub ilae_class: u8,
    pub classification: Classification,
}

impl OutcomeRecord {
    pub fn new(
        patient_id: impl Into<String>,
        hfo_area: Vec<String>,
        resection: Vec<String>,
        ilae_class: u8,
    ) -> Result<Self> {
        if !(1..=6).contains(&ilae_class) {
            return Err(Error::InvalidInput(format!(
                "ILAE class {ilae_class} is outside 1..=6"
            )));
        }
        let classification = classify_outcome(&hfo_area, &resection, ilae_class);
        Ok(OutcomeRecord {
            patient_id: patient_id.into(),
            hfo_area,
            resection,
            ilae_class,
            classification,
        })
    }
}

/// An exact ratio of counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    fn new(num: u64, den: u64) -> Option<Ratio> {
        (den > 0).then_some(Ratio { num, den })
    }

    pub fn percent(&self) -> f64 {
        100.0 * self.num as f64 / self.den as f64
    }

    /// Nearest integer percentage, halves rounded up, in exact arithmetic.
    pub fn rounded_percent(&self) -> u64 {
        (200 * self.num + self.den) / (2 * self.den)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionMetrics {
    pub counts: ConfusionCounts,
    pub specificity: Option<Ratio>,
    pub sensitivity: Option<Ratio>,
    pub npv: Option<Ratio>,
    pub ppv: Option<Ratio>,
    pub accuracy: Option<Ratio>,
}

impl PredictionMetrics {
    /// Rows as `(label, value)` in display order.
    pub fn rows(&self) -> [(&'static str, Option<Ratio>); 5] {
        [
            ("Specificity = TN/(TN + FP)", self.specificity),
            ("Sensitivity = TP/(TP + FN)", self.sensitivity),
            ("Negative Predictive Value = TN/(TN + FN)", self.npv),
            ("Positive Predictive Value = TP/(TP + FP)", self.ppv),
            ("Accuracy = (TP + TN)/N", self.accuracy),
        ]
    }
}

/// Integer percentage, or `--` when undefined.
pub fn format_percent(r: Option<Ratio>) -> String {
    match r {
        Some(r) => r.rounded_percent().to_string(),
        None => "--".to_string(),
    }
}

pub fn compute_metrics(classifications: &[Classification]) -> Result<PredictionMetrics> {
    if classifications.is_empty() {
        return Err(Error::InvalidInput("no classifications".into()));
    }
    let mut c = ConfusionCounts::default();
    for k in classifications {
        match k {
            Classification::TP => c.tp += 1,
            Classification::TN => c.tn += 1,
            Classification::FP => c.fp += 1,
            Classification::FN => c.fn_ += 1,
        }
    }
    // A predictor that never flags a patient has no sensitivity to speak of,
    // even when TP + FN > 0.
    let predicted_positive = c.tp + c.fp > 0;
    Ok(PredictionMetrics {
        counts: c,
        specificity: Ratio::new(c.tn, c.tn + c.fp),
        sensitivity: predicted_positive
            .then(|| Ratio::new(c.tp, c.tp + c.fn_))
            .flatten(),
        npv: Ratio::new(c.tn, c.tn + c.fn_),
        ppv: Ratio::new(c.tp, c.tp + c.fp),
        accuracy: Ratio::new(c.tp + c.tn, c.total()),
    })
}
