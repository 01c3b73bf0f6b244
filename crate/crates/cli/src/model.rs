//! Per-patient report written by `detect` and read by `report`.

use hfo_core::analytics::TestRetest;
use hfo_core::Classification;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRate {
    pub channel: String,
    pub mean_per_min: f64,
    /// Standard error of the mean across intervals; absent for one interval.
    pub sem_per_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalChannel {
    pub channel: String,
    pub events: usize,
    pub rate_per_min: f64,
    /// Input-referred band baselines.
    pub ripple_baseline_uv: f64,
    pub fast_ripple_baseline_uv: f64,
    /// `[R_UP, R_DN, FR_UP, FR_DN]`.
    pub input_spikes: [usize; 4],
    pub output_spikes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalReport {
    pub interval_id: String,
    pub duration_s: f64,
    pub channels: Vec<IntervalChannel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientReport {
    pub patient_id: String,
    pub channels: Vec<String>,
    pub enabled_neurons: usize,
    pub intervals: Vec<IntervalReport>,
    pub rates: Vec<ChannelRate>,
    /// Absent with fewer than two intervals.
    pub test_retest: Option<TestRetest>,
    pub hfo_area: Vec<String>,
    /// Filled in once outcome and resection are known.
    pub classification: Option<Classification>,
}

/// Mean and standard error of the mean.
pub fn mean_sem(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

/// Keeps identifiers usable as file names.
pub fn file_stem(id: &str) -> String {
    let s: String = id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() || s.chars().all(|c| c == '.') {
        format!("_{s}")
    } else {
        s
    }
}
