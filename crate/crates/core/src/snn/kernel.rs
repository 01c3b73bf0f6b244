//! Closed-form propagation of the neuron state between input events, and
//! location of the first threshold crossing.
//!
//! Between events the membrane potential is a sum of three decaying
//! exponentials. `f(t) = V(t) - θ` therefore has the form `Σ c_k e^{-r_k t}`,
//! and its extrema can be bracketed exactly by repeated application of
//! Rolle's theorem: multiplying by `e^{r_0 t}` and differentiating removes one
//! term, so the critical points of a k-term sum are the roots of a (k-1)-term
//! sum. Each monotone piece then holds at most one root, found by bisection.

/// Relative gap below which a synaptic time constant is nudged away from the
/// membrane time constant, keeping the kernel in pure-exponential form.
const DEGENERATE_TAU_REL: f64 = 1e-6;

/// `e^{-t/τm} * V0 + I0 * K(t)` where `K` is the response of the membrane to
/// a unit exponentially decaying current.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    /// `τm τs / (τm - τs)`.
    pub scale: f64,
    pub tau_s: f64,
    /// `max_t K(t)` for a unit current.
    pub peak: f64,
}

impl Kernel {
    pub fn new(tau_m: f64, tau_s: f64) -> Self {
        let tau_s = if (tau_m - tau_s).abs() < DEGENERATE_TAU_REL * tau_m {
            tau_m * (1.0 - DEGENERATE_TAU_REL)
        } else {
            tau_s
        };
        let scale = tau_m * tau_s / (tau_m - tau_s);
        let t_peak = scale * (tau_m / tau_s).ln();
        let peak = scale * ((-t_peak / tau_m).exp() - (-t_peak / tau_s).exp());
        Kernel { scale, tau_s, peak }
    }

    pub fn at(&self, tau_m: f64, t: f64) -> f64 {
        self.scale * ((-t / tau_m).exp() - (-t / self.tau_s).exp())
    }
}

/// Sum of decaying exponentials `Σ coef_k · e^{-rate_k · t}`, rates ascending
/// and distinct.
#[derive(Debug, Clone)]
pub(crate) struct ExpSum {
    terms: Vec<(f64, f64)>,
}

impl ExpSum {
    pub fn new(mut terms: Vec<(f64, f64)>) -> Self {
        terms.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(terms.len());
        for (c, r) in terms {
            match merged.last_mut() {
                Some(last) if last.1 == r => last.0 += c,
                _ => merged.push((c, r)),
            }
        }
        merged.retain(|(c, _)| *c != 0.0);
        ExpSum { terms: merged }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|(c, r)| c * (-r * t).exp()).sum()
    }

    /// Critical points of `self · e^{r_0 t}` (same sign as `self`), as an
    /// `ExpSum` whose roots split `self` into monotone-sign pieces.
    fn reduced_derivative(&self) -> ExpSum {
        let r0 = self.terms[0].1;
        ExpSum::new(
            self.terms[1..]
                .iter()
                .map(|(c, r)| (-c * (r - r0), r - r0))
                .collect(),
        )
    }

    /// Points in `(lo, hi)` that split the interval into pieces on which
    /// `self` changes sign at most once.
    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        if self.terms.len() < 2 {
            return Vec::new();
        }
        self.reduced_derivative().roots(lo, hi)
    }

    /// All sign changes in `[lo, hi]`, located to machine precision.
    fn roots(&self, lo: f64, hi: f64) -> Vec<f64> {
        if self.terms.len() < 2 {
            return Vec::new();
        }
        let mut edges = vec![lo];
        edges.extend(self.breakpoints(lo, hi));
        edges.push(hi);
        let mut out = Vec::new();
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if (fa < 0.0) != (fb < 0.0) {
                let (lo, hi) = bisect(|t| self.eval(t) >= 0.0, a, b, fa >= 0.0, 0.0);
                out.push(if fa >= 0.0 { lo } else { hi });
            }
        }
        out
    }

    /// First zero crossing in `(0, span]`, assuming `self(0) < 0`. The
    /// crossing is bracketed to within `tol` by bisection and then placed by
    /// linear interpolation inside the bracket.
    pub fn first_nonnegative(&self, span: f64, tol: f64) -> Option<f64> {
        let mut edges = self.breakpoints(0.0, span);
        edges.push(span);
        let mut a = 0.0;
        for b in edges {
            if self.eval(b) >= 0.0 {
                let (lo, hi) = bisect(|t| self.eval(t) >= 0.0, a, b, false, tol);
                let (flo, fhi) = (self.eval(lo), self.eval(hi));
                let frac = if fhi > flo { -flo / (fhi - flo) } else { 1.0 };
                return Some(lo + frac.clamp(0.0, 1.0) * (hi - lo));
            }
            a = b;
        }
        None
    }
}

/// Bisection on a predicate whose value at `a` is `at_a` and differs at `b`.
/// Returns the final bracket once it is below `tol` (or cannot shrink
/// further).
fn bisect(pred: impl Fn(f64) -> bool, mut a: f64, mut b: f64, at_a: bool, tol: f64) -> (f64, f64) {
    loop {
        let m = 0.5 * (a + b);
        if b - a <= tol || m <= a || m >= b {
            return (a, b);
        }
        if pred(m) == at_a {
            a = m;
        } else {
            b = m;
        }
    }
}
