//! Grid search over encoder and network settings against labeled events.

use serde::{Deserialize, Serialize};

use crate::analytics::detect_hfos_with;
use crate::error::{Error, Result};
use crate::pipeline::{encode_recording, AdmSettings, ChainSettings};
use crate::signal_io::{EventAnnotation, Recording};
use crate::snn::{sample_network, simulate, NetworkConfig, OutputRaster};

/// Context kept on either side of a labeled event.
pub const SNIPPET_MARGIN_S: f64 = 0.025;
const MAX_CONTROL_PROBES: i64 = 2000;

#[derive(Debug, Clone)]
pub struct LabeledRecording {
    pub recording: Recording,
    pub annotations: Vec<EventAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepScore {
    pub adm_index: usize,
    pub network_index: usize,
    pub adm: AdmSettings,
    pub network: NetworkConfig,
    /// Labeled snippets containing at least one detected event.
    pub hits: usize,
    pub labeled: usize,
    /// Event-free control snippets containing at least one detected event.
    pub false_hits: usize,
    pub controls: usize,
}

impl SweepScore {
    pub fn hit_rate(&self) -> f64 {
        ratio(self.hits, self.labeled)
    }

    pub fn false_rate(&self) -> f64 {
        ratio(self.false_hits, self.controls)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Snippet {
    channel: String,
    start_s: f64,
    end_s: f64,
}

impl Snippet {
    fn overlaps(&self, channel: &str, a: f64, b: f64) -> bool {
        self.channel == channel && a <= self.end_s && b >= self.start_s
    }
}

fn labeled_snippets(l: &LabeledRecording) -> Vec<Snippet> {
    let dur = l.recording.duration_s();
    l.annotations
        .iter()
        .map(|a| Snippet {
            channel: a.channel.clone(),
            start_s: (a.start_s - SNIPPET_MARGIN_S).max(0.0),
            end_s: (a.end_s + SNIPPET_MARGIN_S).min(dur),
        })
        .collect()
}

/// One event-free snippet of matching length per labeled snippet, probed at
/// increasing distance (alternating later/earlier) on the same channel.
fn control_snippets(labeled: &[Snippet], duration_s: f64) -> Vec<Snippet> {
    let mut chosen: Vec<Snippet> = Vec::new();
    for s in labeled {
        let len = s.end_s - s.start_s;
        let stride = len + 2.0 * SNIPPET_MARGIN_S;
        for probe in 1..=MAX_CONTROL_PROBES {
            let k = if probe % 2 == 1 {
                (probe + 1) / 2
            } else {
                -(probe / 2)
            };
            let a = s.start_s + k as f64 * stride;
            let b = a + len;
            if a < 0.0 || b > duration_s {
                continue;
            }
            let clash = labeled
                .iter()
                .chain(chosen.iter())
                .any(|o| o.overlaps(&s.channel, a - SNIPPET_MARGIN_S, b + SNIPPET_MARGIN_S));
            if !clash {
                chosen.push(Snippet {
                    channel: s.channel.clone(),
                    start_s: a,
                    end_s: b,
                });
                break;
            }
        }
    }
    chosen
}

/// Scores every (ADM, network) grid point, ADM-major. Ranking is by hit rate
/// descending, then false rate ascending; ties keep grid order. Neurons whose
/// rate on the recording exceeds the outlier cutoff are removed before
/// scoring.
pub fn sweep_parameters(
    labeled: &LabeledRecording,
    adm_grid: &[AdmSettings],
    network_grid: &[NetworkConfig],
    base: &ChainSettings,
) -> Result<Vec<SweepScore>> {
    if adm_grid.is_empty() || network_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if labeled.annotations.is_empty() {
        return Err(Error::InvalidInput(
            "sweep needs at least one labeled event".into(),
        ));
    }
    let duration = labeled.recording.duration_s();
    for a in &labeled.annotations {
        a.validate(duration)?;
        if labeled.recording.channel_index(&a.channel).is_none() {
            return Err(Error::InvalidAnnotation(format!(
                "unknown channel {:?}",
                a.channel
            )));
        }
    }
    let positives = labeled_snippets(labeled);
    let controls = control_snippets(&positives, duration);
    let det = &base.detection;

    let networks = network_grid
        .iter()
        .map(sample_network)
        .collect::<Result<Vec<_>>>()?;

    let mut scores = Vec::with_capacity(adm_grid.len() * network_grid.len());
    for (ai, adm) in adm_grid.iter().enumerate() {
        let settings = ChainSettings {
            adm: *adm,
            ..base.clone()
        };
        let encodings = encode_recording(&labeled.recording, &settings)?;
        for (ni, params) in networks.iter().enumerate() {
            let mut rasters = encodings
                .iter()
                .map(|e| simulate(params, &e.trains, duration))
                .collect::<Result<Vec<OutputRaster>>>()?;
            // Neurons are independent, so dropping an outlier's row is the
            // same as re-simulating with it disabled.
            for n in 0..params.len() {
                if rasters.iter().any(|r| r.rate_hz(n) > det.outlier_rate_hz) {
                    rasters.iter_mut().for_each(|r| r.spikes[n].clear());
                }
            }
            let events: Vec<_> = encodings
                .iter()
                .zip(&rasters)
                .flat_map(|(e, r)| {
                    detect_hfos_with(
                        r,
                        &e.channel,
                        det.merge_window_ms * 1e-3,
                        det.min_event_span_ms * 1e-3,
                    )
                })
                .collect();
            let count = |snips: &[Snippet]| {
                snips
                    .iter()
                    .filter(|s| {
                        events
                            .iter()
                            .any(|e| s.overlaps(&e.channel, e.start_s, e.end_s))
                    })
                    .count()
            };
            scores.push(SweepScore {
                adm_index: ai,
                network_index: ni,
                adm: *adm,
                network: network_grid[ni].clone(),
                hits: count(&positives),
                labeled: positives.len(),
                false_hits: count(&controls),
                controls: controls.len(),
            });
        }
    }
    scores.sort_by(|a, b| {
        b.hit_rate()
            .total_cmp(&a.hit_rate())
            .then(a.false_rate().total_cmp(&b.false_rate()))
    });
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn controls_avoid_labels() {
        let labeled = vec![
            Snippet {
                channel: "a".into(),
                start_s: 1.0,
                end_s: 1.15,
            },
            Snippet {
                channel: "a".into(),
                start_s: 1.25,
                end_s: 1.4,
            },
        ];
        let c = control_snippets(&labeled, 5.0);
        assert_eq!(c.len(), 2);
        for s in &c {
            assert!((s.end_s - s.start_s - 0.15).abs() < 1e-12);
            assert!(labeled.iter().all(|l| !l.overlaps("a", s.start_s, s.end_s)));
        }
        assert!(!c[0].overlaps("a", c[1].start_s, c[1].end_s));
    }
}
