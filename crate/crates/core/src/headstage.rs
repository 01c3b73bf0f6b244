//! Closed-form design equations for the analog front end: the capacitive
//! feedback LNA and the Tow-Thomas band-pass biquad. These produce design
//! targets only; nothing here simulates a circuit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Selectable input capacitors of the programmable-gain LNA.
pub const LNA_INPUT_CAPACITORS_F: [f64; 4] = [2e-12, 8e-12, 14e-12, 20e-12];
/// Feedback capacitor of the LNA.
pub const LNA_FEEDBACK_CAPACITOR_F: f64 = 200e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LnaParams {
    pub c_in: f64,
    pub c_f: f64,
    pub gm: f64,
    pub c_load: f64,
}

impl LnaParams {
    pub fn validate(&self) -> Result<()> {
        let all_positive = [self.c_in, self.c_f, self.gm, self.c_load]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !all_positive {
            return Err(Error::InvalidInput(
                "LNA parameters must be positive".into(),
            ));
        }
        if self.c_in < self.c_f {
            return Err(Error::InvalidInput("LNA needs c_in >= c_f".into()));
        }
        Ok(())
    }
}

/// Midband gain `C_in / C_f`, in dB.
pub fn lna_gain_db(p: &LnaParams) -> Result<f64> {
    p.validate()?;
    Ok(20.0 * (p.c_in / p.c_f).log10())
}

/// `Gm / (A_M * C_L)`, evaluated as printed. Note this is an angular
/// quantity; no 2π conversion is applied.
pub fn lna_bandwidth_hz(p: &LnaParams, gain_linear: f64) -> Result<f64> {
    p.validate()?;
    if !(gain_linear > 0.0) {
        return Err(Error::InvalidInput("gain must be positive".into()));
    }
    Ok(p.gm / (gain_linear * p.c_load))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TowThomasParams {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
    pub r5: f64,
    pub r6: f64,
    pub c1: f64,
}

impl TowThomasParams {
    /// Matched integrator resistors `r3 = r4 = r`, unity inverter `r5 = r6`.
    pub fn matched(r: f64, r1: f64, r2: f64, c1: f64) -> Self {
        TowThomasParams {
            r1,
            r2,
            r3: r,
            r4: r,
            r5: 1.0,
            r6: 1.0,
            c1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let v = [
            self.r1, self.r2, self.r3, self.r4, self.r5, self.r6, self.c1,
        ];
        if v.iter().all(|x| *x > 0.0 && x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidInput(
                "Tow-Thomas components must be positive".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TowThomasResponse {
    pub f0_hz: f64,
    pub gain_linear: f64,
    pub bw_hz: f64,
}

pub fn towthomas_response(p: &TowThomasParams) -> Result<TowThomasResponse> {
    p.validate()?;
    let f0_hz = 1.0 / (2.0 * PI * (p.r3 * p.r4 * p.c1 * p.c1).sqrt());
    Ok(TowThomasResponse {
        f0_hz,
        gain_linear: p.r4 / p.r1,
        bw_hz: 2.0 * PI * f0_hz * (p.r3 * p.r4).sqrt() / p.r2,
    })
}

/// Reduced forms for `r3 = r4 = r`: `f0 = 1/(2πRC1)`, `|T| = R/R1`,
/// `BW = 1/(R2 C1)`.
pub fn towthomas_matched_response(r: f64, r1: f64, r2: f64, c1: f64) -> Result<TowThomasResponse> {
    TowThomasParams::matched(r, r1, r2, c1).validate()?;
    Ok(TowThomasResponse {
        f0_hz: 1.0 / (2.0 * PI * r * c1),
        gain_linear: r / r1,
        bw_hz: 1.0 / (r2 * c1),
    })
}

/// Integrator resistance that places `f0` at `target_hz` for a given `c1`.
pub fn towthomas_resistance_for(target_hz: f64, c1: f64) -> f64 {
    1.0 / (2.0 * PI * target_hz * c1)
}
