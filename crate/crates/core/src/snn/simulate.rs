use rayon::prelude::*;

use super::kernel::{ExpSum, Kernel};
use super::{merge_inputs, NetworkParams, NeuronParams, OutputRaster, CROSSING_TOLERANCE_S};
use crate::adm::SpikeTrain;
use crate::error::Result;

/// Event-driven simulation. Between input events each neuron's state is
/// propagated in closed form; threshold crossings inside an interval are
/// bracketed exactly and refined by bisection.
pub fn simulate(
    params: &NetworkParams,
    inputs: &[SpikeTrain],
    duration_s: f64,
) -> Result<OutputRaster> {
    params.validate()?;
    let events = merge_inputs(inputs)?;
    let spikes = (0..params.len())
        .into_par_iter()
        .map(|i| run_neuron(&params.neurons[i], params.refractory_s, &events, duration_s))
        .collect();
    Ok(OutputRaster { spikes, duration_s })
}

/// Output of a single neuron; identical to row `index` of [`simulate`].
pub fn simulate_neuron(
    params: &NetworkParams,
    index: usize,
    inputs: &[SpikeTrain],
    duration_s: f64,
) -> Result<Vec<f64>> {
    params.validate()?;
    let events = merge_inputs(inputs)?;
    Ok(run_neuron(
        &params.neurons[index],
        params.refractory_s,
        &events,
        duration_s,
    ))
}

struct Neuron<'a> {
    p: &'a NeuronParams,
    exc: Kernel,
    inh: Kernel,
    refractory_s: f64,
    t: f64,
    v: f64,
    i_exc: f64,
    i_inh: f64,
    refractory_until: f64,
    out: Vec<f64>,
}

impl<'a> Neuron<'a> {
    fn new(p: &'a NeuronParams, refractory_s: f64) -> Self {
        Neuron {
            p,
            exc: Kernel::new(p.tau_m, p.tau_exc),
            inh: Kernel::new(p.tau_m, p.tau_inh),
            refractory_s,
            t: 0.0,
            v: 0.0,
            i_exc: 0.0,
            i_inh: 0.0,
            refractory_until: f64::NEG_INFINITY,
            out: Vec::new(),
        }
    }

    fn decay_currents(&mut self, dt: f64) {
        self.i_exc *= (-dt / self.exc.tau_s).exp();
        self.i_inh *= (-dt / self.inh.tau_s).exp();
    }

    fn propagate(&mut self, dt: f64) {
        let tau_m = self.p.tau_m;
        self.v = self.v * (-dt / tau_m).exp() + self.i_exc * self.exc.at(tau_m, dt)
            - self.i_inh * self.inh.at(tau_m, dt);
        self.decay_currents(dt);
    }

    /// `V(t) - θ` over the next interval as a sum of exponentials.
    fn excess(&self) -> ExpSum {
        let (e, i) = (&self.exc, &self.inh);
        let rm = 1.0 / self.p.tau_m;
        ExpSum::new(vec![
            (-self.p.threshold, 0.0),
            (self.v + self.i_exc * e.scale - self.i_inh * i.scale, rm),
            (-self.i_exc * e.scale, 1.0 / e.tau_s),
            (self.i_inh * i.scale, 1.0 / i.tau_s),
        ])
    }

    fn fire(&mut self, at: f64) {
        self.out.push(at);
        self.v = 0.0;
        self.t = at;
        self.refractory_until = at + self.refractory_s;
    }

    fn advance_to(&mut self, target: f64) {
        while self.t < target {
            if self.t < self.refractory_until {
                let end = self.refractory_until.min(target);
                self.decay_currents(end - self.t);
                self.v = 0.0;
                self.t = end;
                continue;
            }
            if self.v >= self.p.threshold {
                let t = self.t;
                self.fire(t);
                continue;
            }
            let span = target - self.t;
            // V(t) <= max(V0, 0) + I_exc * peak(K_exc) since inhibition only
            // lowers the potential.
            let bound = self.v.max(0.0) + self.i_exc * self.exc.peak;
            if bound >= self.p.threshold {
                if let Some(dt) = self.excess().first_nonnegative(span, CROSSING_TOLERANCE_S) {
                    let at = self.t + dt;
                    self.decay_currents(dt);
                    self.fire(at);
                    continue;
                }
            }
            self.propagate(span);
            self.t = target;
        }
    }
}

fn run_neuron(
    p: &NeuronParams,
    refractory_s: f64,
    events: &[(f64, bool)],
    duration_s: f64,
) -> Vec<f64> {
    if !p.enabled {
        return Vec::new();
    }
    let mut n = Neuron::new(p, refractory_s);
    for &(t, excitatory) in events {
        if t > duration_s {
            break;
        }
        n.advance_to(t);
        if excitatory {
            n.i_exc += p.w_exc;
        } else {
            n.i_inh += p.w_inh;
        }
    }
    n.advance_to(duration_s);
    n.out
}
