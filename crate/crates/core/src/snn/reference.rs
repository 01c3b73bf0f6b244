use rayon::prelude::*;

use super::{merge_inputs, NetworkParams, NeuronParams, OutputRaster};
use crate::adm::SpikeTrain;
use crate::error::{Error, Result};

/// Fixed-step simulation of the same dynamics, used as an independent check
/// on [`super::simulate`]. Each step of length `dt` is split at input events
/// and at the end of a refractory period; on each piece the synaptic currents
/// decay by their exact factor and the membrane takes one explicit Heun
/// (trapezoidal predictor-corrector) step. Crossings are placed by linear
/// interpolation within the piece.
pub fn reference_simulate(
    params: &NetworkParams,
    inputs: &[SpikeTrain],
    duration_s: f64,
    dt: f64,
) -> Result<OutputRaster> {
    params.validate()?;
    let tau_min = params
        .neurons
        .iter()
        .map(|n| n.tau_inh.min(n.tau_exc))
        .fold(f64::INFINITY, f64::min);
    let max_s = tau_min / 10.0;
    if !(dt > 0.0) || dt > max_s * (1.0 + 1e-9) {
        return Err(Error::StepTooCoarse { dt_s: dt, max_s });
    }
    let events = merge_inputs(inputs)?;
    let spikes = params
        .neurons
        .par_iter()
        .map(|n| step_neuron(n, params.refractory_s, &events, duration_s, dt))
        .collect();
    Ok(OutputRaster { spikes, duration_s })
}

fn step_neuron(
    p: &NeuronParams,
    refractory_s: f64,
    events: &[(f64, bool)],
    duration_s: f64,
    dt: f64,
) -> Vec<f64> {
    let mut out = Vec::new();
    if !p.enabled {
        return out;
    }
    let (mut v, mut ie, mut ii) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut refractory_until = f64::NEG_INFINITY;
    let mut next_event = 0;
    let steps = (duration_s / dt).ceil() as usize;

    for n in 0..steps {
        let step_end = ((n + 1) as f64 * dt).min(duration_s);
        let mut t = n as f64 * dt;
        while t < step_end {
            // apply inputs that arrive now
            while next_event < events.len() && events[next_event].0 <= t {
                if events[next_event].1 {
                    ie += p.w_exc;
                } else {
                    ii += p.w_inh;
                }
                next_event += 1;
            }
            let mut piece_end = step_end;
            if next_event < events.len() && events[next_event].0 < piece_end {
                piece_end = events[next_event].0;
            }
            if t < refractory_until && refractory_until < piece_end {
                piece_end = refractory_until;
            }
            let h = piece_end - t;
            let ie_end = ie * (-h / p.tau_exc).exp();
            let ii_end = ii * (-h / p.tau_inh).exp();
            if t < refractory_until {
                v = 0.0;
            } else {
                let slope0 = -v / p.tau_m + (ie - ii);
                let predicted = v + h * slope0;
                let slope1 = -predicted / p.tau_m + (ie_end - ii_end);
                let v_end = v + 0.5 * h * (slope0 + slope1);
                if v_end >= p.threshold {
                    let frac = if v_end > v {
                        (p.threshold - v) / (v_end - v)
                    } else {
                        1.0
                    };
                    let at = t + frac.clamp(0.0, 1.0) * h;
                    out.push(at);
                    refractory_until = at + refractory_s;
                    v = 0.0;
                    // resume from the spike time
                    ie *= (-(at - t) / p.tau_exc).exp();
                    ii *= (-(at - t) / p.tau_inh).exp();
                    t = at;
                    continue;
                } else {
                    v = v_end;
                }
            }
            ie = ie_end;
            ii = ii_end;
            t = piece_end;
        }
    }
    out
}
