//! Second-order Butterworth filters via the bilinear transform, and causal
//! biquad filtering of recordings.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_io::Recording;

pub const RIPPLE_BAND_HZ: (f64, f64) = (80.0, 250.0);
pub const FAST_RIPPLE_BAND_HZ: (f64, f64) = (250.0, 500.0);
pub const LOWPASS_CUTOFF_HZ: f64 = 80.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandName {
    Ripple,
    FastRipple,
    Lowpass,
}

impl fmt::Display for BandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BandName::Ripple => "ripple",
            BandName::FastRipple => "fast_ripple",
            BandName::Lowpass => "lowpass",
        })
    }
}

/// A pass band. For [`BandName::Lowpass`] only `high_hz` (the cutoff) is used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    pub name: BandName,
    pub low_hz: f64,
    pub high_hz: f64,
}

impl BandSpec {
    pub fn ripple() -> Self {
        BandSpec {
            name: BandName::Ripple,
            low_hz: RIPPLE_BAND_HZ.0,
            high_hz: RIPPLE_BAND_HZ.1,
        }
    }

    pub fn fast_ripple() -> Self {
        BandSpec {
            name: BandName::FastRipple,
            low_hz: FAST_RIPPLE_BAND_HZ.0,
            high_hz: FAST_RIPPLE_BAND_HZ.1,
        }
    }

    pub fn lowpass() -> Self {
        BandSpec {
            name: BandName::Lowpass,
            low_hz: 0.0,
            high_hz: LOWPASS_CUTOFF_HZ,
        }
    }

    pub fn validate(&self, sample_rate_hz: f64) -> Result<()> {
        let nyquist_hz = sample_rate_hz / 2.0;
        if self.high_hz >= nyquist_hz {
            return Err(Error::BandEdgeAboveNyquist {
                edge_hz: self.high_hz,
                nyquist_hz,
            });
        }
        let ok = match self.name {
            BandName::Lowpass => self.high_hz > 0.0,
            _ => self.low_hz > 0.0 && self.low_hz < self.high_hz,
        };
        if ok && self.high_hz.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidBand(format!(
                "{} needs 0 < low < high, got [{}, {}]",
                self.name, self.low_hz, self.high_hz
            )))
        }
    }
}

/// One biquad with `a0` normalized to 1:
/// `y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiquadSection {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl BiquadSection {
    /// Both poles strictly inside the unit circle (stability triangle).
    pub fn is_stable(&self) -> bool {
        self.a2.abs() < 1.0 && self.a1.abs() < 1.0 + self.a2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiquadCoeffs {
    pub band: BandName,
    pub sections: Vec<BiquadSection>,
}

impl BiquadCoeffs {
    pub fn is_stable(&self) -> bool {
        self.sections.iter().all(BiquadSection::is_stable)
    }

    pub fn filter(&self) -> BiquadFilter {
        BiquadFilter {
            sections: self.sections.clone(),
            state: vec![[0.0; 2]; self.sections.len()],
        }
    }
}

/// Stateful cascade in transposed direct form II. One instance per stream.
#[derive(Debug, Clone)]
pub struct BiquadFilter {
    sections: Vec<BiquadSection>,
    state: Vec<[f64; 2]>,
}

impl BiquadFilter {
    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        let mut v = x;
        for (s, z) in self.sections.iter().zip(self.state.iter_mut()) {
            let y = s.b0 * v + z[0];
            z[0] = s.b1 * v - s.a1 * y + z[1];
            z[1] = s.b2 * v - s.a2 * y;
            v = y;
        }
        v
    }

    pub fn reset(&mut self) {
        self.state.iter_mut().for_each(|z| *z = [0.0; 2]);
    }

    pub fn run(&mut self, input: &[f64]) -> Vec<f64> {
        input.iter().map(|x| self.process(*x)).collect()
    }
}

fn prewarp(f_hz: f64, sample_rate_hz: f64) -> f64 {
    2.0 * sample_rate_hz * (PI * f_hz / sample_rate_hz).tan()
}

/// Second-order Butterworth band-pass, `H(s) = Bs / (s² + Bs + ω0²)`, mapped
/// with the bilinear transform. Both edges are pre-warped so the digital −3 dB
/// points land on `low_hz` and `high_hz`.
pub fn design_bandpass(band: &BandSpec, sample_rate_hz: f64) -> Result<BiquadCoeffs> {
    band.validate(sample_rate_hz)?;
    if band.name == BandName::Lowpass {
        return design_lowpass(band, sample_rate_hz);
    }
    let k = 2.0 * sample_rate_hz;
    let w1 = prewarp(band.low_hz, sample_rate_hz);
    let w2 = prewarp(band.high_hz, sample_rate_hz);
    let bw = w2 - w1;
    let w0_sq = w1 * w2;
    let a0 = k * k + bw * k + w0_sq;
    let section = BiquadSection {
        b0: bw * k / a0,
        b1: 0.0,
        b2: -bw * k / a0,
        a1: (2.0 * w0_sq - 2.0 * k * k) / a0,
        a2: (k * k - bw * k + w0_sq) / a0,
    };
    Ok(BiquadCoeffs {
        band: band.name,
        sections: vec![section],
    })
}

/// Second-order Butterworth low-pass at `band.high_hz`.
pub fn design_lowpass(band: &BandSpec, sample_rate_hz: f64) -> Result<BiquadCoeffs> {
    band.validate(sample_rate_hz)?;
    let k = 2.0 * sample_rate_hz;
    let wc = prewarp(band.high_hz, sample_rate_hz);
    let a0 = k * k + SQRT_2 * wc * k + wc * wc;
    let g = wc * wc / a0;
    let section = BiquadSection {
        b0: g,
        b1: 2.0 * g,
        b2: g,
        a1: (2.0 * wc * wc - 2.0 * k * k) / a0,
        a2: (k * k - SQRT_2 * wc * k + wc * wc) / a0,
    };
    Ok(BiquadCoeffs {
        band: band.name,
        sections: vec![section],
    })
}

/// Causal filtering of every channel from zero initial state. Channel labels
/// get the band name appended (`AR1-2` becomes `AR1-2:ripple`).
pub fn apply_filter(recording: &Recording, coeffs: &BiquadCoeffs) -> Recording {
    let filtered: Vec<Vec<f64>> = recording
        .samples()
        .par_iter()
        .map(|x| coeffs.filter().run(x))
        .collect();
    let mut out = recording.with_samples(filtered);
    out.append_to_labels(&format!(":{}", coeffs.band));
    out
}
