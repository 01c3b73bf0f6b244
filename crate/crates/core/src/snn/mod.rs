//! Two-layer spiking network: four ADM input streams fan out to a population
//! of leaky integrate-and-fire neurons. UP streams drive a shared excitatory
//! synapse per neuron and DN streams a shared inhibitory one. Time constants
//! are drawn per neuron to mimic analog device mismatch.

mod kernel;
mod reference;
mod simulate;

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::adm::{Polarity, SpikeTrain};
use crate::error::{Error, Result};

pub use reference::reference_simulate;
pub use simulate::{simulate, simulate_neuron};

pub const DEFAULT_NEURONS: usize = 256;
pub const DEFAULT_TAU_M_S: f64 = 0.015;
pub const DEFAULT_TAU_M_CV: f64 = 0.20;
pub const DEFAULT_TAU_EXC_RANGE_S: (f64, f64) = (0.003, 0.006);
pub const DEFAULT_TAU_INH_RANGE_S: (f64, f64) = (0.0001, 0.001);
pub const DEFAULT_THRESHOLD: f64 = 1.0;
pub const DEFAULT_NEURON_REFRACTORY_S: f64 = 0.001;
pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_OUTLIER_RATE_HZ: f64 = 2.0;

/// Bisection tolerance for locating threshold crossings.
pub const CROSSING_TOLERANCE_S: f64 = 1e-6;
const TAU_M_FLOOR_S: f64 = 0.001;
const TAU_M_TRUNCATION_SIGMAS: f64 = 3.0;

/// Calibration burst used to anchor the default excitatory weight.
const ANCHOR_BURST_SPIKES: usize = 20;
const ANCHOR_BURST_RATE_HZ: f64 = 1000.0;
const ANCHOR_MARGIN: f64 = 1.001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    pub n_neurons: usize,
    pub tau_m_mean_s: f64,
    pub tau_m_cv: f64,
    pub tau_exc_range_s: (f64, f64),
    pub tau_inh_range_s: (f64, f64),
    /// `None` anchors the weight to the calibration burst, see
    /// [`anchored_excitatory_weight`].
    pub w_exc: Option<f64>,
    /// `None` means equal to the excitatory weight.
    pub w_inh: Option<f64>,
    pub v_threshold: f64,
    pub refractory_s: f64,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            n_neurons: DEFAULT_NEURONS,
            tau_m_mean_s: DEFAULT_TAU_M_S,
            tau_m_cv: DEFAULT_TAU_M_CV,
            tau_exc_range_s: DEFAULT_TAU_EXC_RANGE_S,
            tau_inh_range_s: DEFAULT_TAU_INH_RANGE_S,
            w_exc: None,
            w_inh: None,
            v_threshold: DEFAULT_THRESHOLD,
            refractory_s: DEFAULT_NEURON_REFRACTORY_S,
            seed: DEFAULT_SEED,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidNetworkConfig(m));
        if self.n_neurons == 0 {
            return bad("n_neurons must be at least 1".into());
        }
        if !(self.tau_m_mean_s > 0.0) {
            return bad(format!(
                "tau_m_mean_s {} must be positive",
                self.tau_m_mean_s
            ));
        }
        if !(0.0..1.0).contains(&self.tau_m_cv) {
            return bad(format!("tau_m_cv {} must lie in [0, 1)", self.tau_m_cv));
        }
        for (name, (lo, hi)) in [
            ("tau_exc", self.tau_exc_range_s),
            ("tau_inh", self.tau_inh_range_s),
        ] {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return bad(format!(
                    "{name} range [{lo}, {hi}] must be positive and ordered"
                ));
            }
        }
        for (name, w) in [("w_exc", self.w_exc), ("w_inh", self.w_inh)] {
            if let Some(w) = w {
                if !(w > 0.0 && w.is_finite()) {
                    return bad(format!("{name} {w} must be positive"));
                }
            }
        }
        if !(self.v_threshold > 0.0) {
            return bad(format!("v_threshold {} must be positive", self.v_threshold));
        }
        if !(self.refractory_s >= 0.0) {
            return bad(format!(
                "refractory_s {} must be non-negative",
                self.refractory_s
            ));
        }
        Ok(())
    }

    /// Fills in the weight defaults.
    pub fn resolved(&self) -> NetworkConfig {
        let w_exc = self.w_exc.unwrap_or_else(|| {
            anchored_excitatory_weight(
                self.tau_m_mean_s,
                0.5 * (self.tau_exc_range_s.0 + self.tau_exc_range_s.1),
                self.v_threshold,
            )
        });
        NetworkConfig {
            w_exc: Some(w_exc),
            w_inh: Some(self.w_inh.unwrap_or(w_exc)),
            ..self.clone()
        }
    }
}

/// Weight at which a 20-spike, 1 kHz excitatory burst just lifts a neuron with
/// the given time constants past `threshold`.
pub fn anchored_excitatory_weight(tau_m: f64, tau_exc: f64, threshold: f64) -> f64 {
    let k = kernel::Kernel::new(tau_m, tau_exc);
    let isi = 1.0 / ANCHOR_BURST_RATE_HZ;
    let last = (ANCHOR_BURST_SPIKES - 1) as f64 * isi;
    let response = |t: f64| -> f64 {
        (0..ANCHOR_BURST_SPIKES)
            .map(|i| i as f64 * isi)
            .filter(|s| *s <= t)
            .map(|s| k.at(tau_m, t - s))
            .sum()
    };
    // coarse scan, then golden-section refinement around the best sample
    let horizon = last + 5.0 * tau_m.max(tau_exc);
    let step = 1e-5;
    let n = (horizon / step) as usize;
    let best = (0..=n)
        .map(|i| i as f64 * step)
        .max_by(|a, b| response(*a).total_cmp(&response(*b)))
        .unwrap_or(0.0);
    let (mut a, mut b) = ((best - step).max(0.0), best + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if response(c) > response(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let peak = response(0.5 * (a + b)).max(response(best));
    threshold / peak * ANCHOR_MARGIN
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronParams {
    pub tau_m: f64,
    pub tau_exc: f64,
    pub tau_inh: f64,
    pub w_exc: f64,
    pub w_inh: f64,
    pub threshold: f64,
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub neurons: Vec<NeuronParams>,
    pub refractory_s: f64,
}

impl NetworkParams {
    pub fn len(&self) -> usize {
        self.neurons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neurons.is_empty()
    }

    pub fn enabled_count(&self) -> usize {
        self.neurons.iter().filter(|n| n.enabled).count()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, n) in self.neurons.iter().enumerate() {
            let ok = [n.tau_m, n.tau_exc, n.tau_inh, n.threshold]
                .iter()
                .all(|v| *v > 0.0 && v.is_finite())
                && n.w_exc >= 0.0
                && n.w_inh >= 0.0;
            if !ok {
                return Err(Error::InvalidNetworkConfig(format!(
                    "neuron {i} has invalid parameters"
                )));
            }
        }
        if !(self.refractory_s >= 0.0) {
            return Err(Error::InvalidNetworkConfig(
                "negative refractory period".into(),
            ));
        }
        Ok(())
    }
}

/// Draws per-neuron parameters: `tau_m` from a normal distribution truncated
/// at ±3σ and floored at 1 ms, synaptic time constants uniformly from their
/// ranges. Deterministic in `config.seed`.
pub fn sample_network(config: &NetworkConfig) -> Result<NetworkParams> {
    config.validate()?;
    let resolved = config.resolved();
    let (w_exc, w_inh) = (resolved.w_exc.unwrap(), resolved.w_inh.unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let sigma = config.tau_m_cv * config.tau_m_mean_s;
    let normal = Normal::new(config.tau_m_mean_s, sigma)
        .map_err(|e| Error::InvalidNetworkConfig(e.to_string()))?;
    let uniform = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| {
        if hi > lo {
            rng.random_range(lo..=hi)
        } else {
            lo
        }
    };

    let neurons = (0..config.n_neurons)
        .map(|_| {
            let tau_m = loop {
                let v = normal.sample(&mut rng);
                if (v - config.tau_m_mean_s).abs() <= TAU_M_TRUNCATION_SIGMAS * sigma {
                    break v.max(TAU_M_FLOOR_S);
                }
            };
            let tau_exc = uniform(&mut rng, config.tau_exc_range_s);
            let tau_inh = uniform(&mut rng, config.tau_inh_range_s);
            NeuronParams {
                tau_m,
                tau_exc,
                tau_inh,
                w_exc,
                w_inh,
                threshold: config.v_threshold,
                enabled: true,
            }
        })
        .collect();
    Ok(NetworkParams {
        neurons,
        refractory_s: config.refractory_s,
    })
}

/// Output spike times per neuron.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRaster {
    pub spikes: Vec<Vec<f64>>,
    pub duration_s: f64,
}

impl OutputRaster {
    pub fn empty(n_neurons: usize, duration_s: f64) -> Self {
        OutputRaster {
            spikes: vec![Vec::new(); n_neurons],
            duration_s,
        }
    }

    pub fn total_spikes(&self) -> usize {
        self.spikes.iter().map(Vec::len).sum()
    }

    pub fn rate_hz(&self, neuron: usize) -> f64 {
        if self.duration_s > 0.0 {
            self.spikes[neuron].len() as f64 / self.duration_s
        } else {
            0.0
        }
    }

    /// All spikes, sorted by time, with the emitting neuron.
    pub fn pooled(&self) -> Vec<(f64, usize)> {
        let mut all: Vec<(f64, usize)> = self
            .spikes
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |t| (*t, i)))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("neuron_id,time_s\n");
        for (t, i) in self.pooled() {
            out.push_str(&format!("{i},{t}\n"));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Switches off neurons whose calibration firing rate exceeds `max_rate_hz`.
/// Rates from several calibration rasters are combined by taking the maximum.
pub fn disable_outliers(
    params: &NetworkParams,
    calibration: &[&OutputRaster],
    max_rate_hz: f64,
) -> NetworkParams {
    let mut out = params.clone();
    for (i, n) in out.neurons.iter_mut().enumerate() {
        let rate = calibration
            .iter()
            .filter(|r| i < r.spikes.len())
            .map(|r| r.rate_hz(i))
            .fold(0.0, f64::max);
        if rate > max_rate_hz {
            n.enabled = false;
        }
    }
    out
}

/// Input events merged across trains: `(time, excitatory?)`, sorted by time.
pub(crate) fn merge_inputs(inputs: &[SpikeTrain]) -> Result<Vec<(f64, bool)>> {
    let mut events = Vec::with_capacity(inputs.iter().map(SpikeTrain::len).sum());
    for train in inputs {
        let t = train.times();
        if let Some(i) = t.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(Error::UnsortedSpikes { index: i + 1 });
        }
        if let Some(i) = t.iter().position(|v| !v.is_finite()) {
            return Err(Error::UnsortedSpikes { index: i });
        }
        let excitatory = train.polarity == Polarity::Up;
        events.extend(t.iter().map(|v| (*v, excitatory)));
    }
    // Stable: simultaneous events keep train order.
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cv_gives_identical_membranes() {
        let cfg = NetworkConfig {
            tau_m_cv: 0.0,
            ..Default::default()
        };
        let p = sample_network(&cfg).unwrap();
        assert!(p.neurons.iter().all(|n| n.tau_m == 0.015));
    }

    #[test]
    fn sampling_is_seeded() {
        let cfg = NetworkConfig::default();
        assert_eq!(sample_network(&cfg).unwrap(), sample_network(&cfg).unwrap());
        let other = NetworkConfig {
            seed: 99,
            ..Default::default()
        };
        assert_ne!(
            sample_network(&cfg).unwrap(),
            sample_network(&other).unwrap()
        );
    }

    #[test]
    fn tau_m_truncated_and_floored() {
        let cfg = NetworkConfig {
            tau_m_cv: 0.9,
            n_neurons: 2000,
            ..Default::default()
        };
        let p = sample_network(&cfg).unwrap();
        let sigma = 0.9 * 0.015;
        for n in &p.neurons {
            assert!(n.tau_m >= TAU_M_FLOOR_S);
            assert!(n.tau_m <= 0.015 + 3.0 * sigma + 1e-15);
        }
    }

    #[test]
    fn config_validation() {
        let bad = [
            NetworkConfig {
                n_neurons: 0,
                ..Default::default()
            },
            NetworkConfig {
                tau_m_cv: 1.0,
                ..Default::default()
            },
            NetworkConfig {
                tau_exc_range_s: (0.006, 0.003),
                ..Default::default()
            },
            NetworkConfig {
                w_inh: Some(-1.0),
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(sample_network(&c).is_err(), "{c:?}");
        }
    }

    #[test]
    fn default_inhibitory_weight_matches_excitatory() {
        let r = NetworkConfig::default().resolved();
        assert_eq!(r.w_exc, r.w_inh);
        let explicit = NetworkConfig {
            w_exc: Some(0.3),
            ..Default::default()
        }
        .resolved();
        assert_eq!(explicit.w_inh, Some(0.3));
    }

    #[test]
    fn outlier_disabling() {
        let p = sample_network(&NetworkConfig {
            n_neurons: 4,
            ..Default::default()
        })
        .unwrap();
        let empty = OutputRaster::empty(4, 10.0);
        assert_eq!(disable_outliers(&p, &[&empty], 2.0), p);

        let mut busy = OutputRaster::empty(4, 10.0);
        busy.spikes[2] = (0..500).map(|i| i as f64 * 0.02).collect();
        busy.spikes[1] = vec![1.0, 2.0];
        let q = disable_outliers(&p, &[&busy], 2.0);
        let enabled: Vec<bool> = q.neurons.iter().map(|n| n.enabled).collect();
        assert_eq!(enabled, vec![true, true, false, true]);
        assert_eq!(disable_outliers(&p, &[&busy], f64::INFINITY), p);
    }
}
