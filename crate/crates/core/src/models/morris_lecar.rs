//! Morris–Lecar neuron with stochastic ion channels.
//!
//! The voltage follows `C V' = I - Σ g_i u_i (V - V_i)` (the leak `u_3` is
//! always 1) while the open fractions `u_1, u_2 ∈ {0, 1/K, …, 1}` are
//! birth–death chains. With `K` independent channels of each type the total
//! opening rate of type `i` is `K (1 - u_i) α_i(V)` and the total closing rate
//! is `K u_i β_i(V)`.
//!
//! Mode index of `(u_1, u_2) = (n_1/K, n_2/K)` is `n_1 (K + 1) + n_2`.

use super::spec::MorrisLecarParams;
use super::ModelError;
use crate::engine::{pick_by_cdf, FlowKind, HybridState, PdmpModel};
use crate::rng::RandomSource;

/// Opening and closing rates `(α_i(V), β_i(V))` of channel type `channel`
/// (1 or 2).
pub fn morris_lecar_rates(v: f64, channel: usize, params: &MorrisLecarParams) -> (f64, f64) {
    let k = channel - 1;
    let z = (v - params.half_activation[k]) / params.slope[k];
    let envelope = params.rate_scale[k] * (0.5 * z).cosh();
    let t = z.tanh();
    (envelope * (1.0 + t), envelope * (1.0 - t))
}

/// Closed voltage interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MorrisLecarModel {
    pub params: MorrisLecarParams,
}

impl MorrisLecarModel {
    pub fn channels(&self) -> usize {
        self.params.channels
    }

    /// `(n_1, n_2)` of a mode index.
    pub fn counts(&self, mode: usize) -> (usize, usize) {
        let side = self.params.channels + 1;
        (mode / side, mode % side)
    }

    pub fn mode_index(&self, n1: usize, n2: usize) -> usize {
        n1 * (self.params.channels + 1) + n2
    }

    /// Open fractions `(u_1, u_2)` of a mode.
    pub fn fractions(&self, mode: usize) -> (f64, f64) {
        let (n1, n2) = self.counts(mode);
        let k = self.params.channels as f64;
        (n1 as f64 / k, n2 as f64 / k)
    }

    /// `(rate constant, resting voltage)` of the affine voltage field of a
    /// mode: `V' = -κ (V - V_∞)`.
    fn relaxation(&self, mode: usize) -> (f64, f64) {
        let (u1, u2) = self.fractions(mode);
        let p = &self.params;
        let weights = [p.conductance[0] * u1, p.conductance[1] * u2, p.conductance[2]];
        let total: f64 = weights.iter().sum();
        let pull: f64 = weights.iter().zip(&p.reversal).map(|(w, v)| w * v).sum();
        (total / p.capacitance, (p.current + pull) / total)
    }

    /// Outgoing `(target mode, rate)` pairs at `state`, ascending by target.
    fn transitions(&self, state: &HybridState, out: &mut Vec<(usize, f64)>) {
        out.clear();
        let v = state.x[0];
        let k = self.params.channels;
        let (n1, n2) = self.counts(state.mode);
        let (a1, b1) = morris_lecar_rates(v, 1, &self.params);
        let (a2, b2) = morris_lecar_rates(v, 2, &self.params);
        if n1 > 0 {
            out.push((self.mode_index(n1 - 1, n2), n1 as f64 * b1));
        }
        if n2 > 0 {
            out.push((self.mode_index(n1, n2 - 1), n2 as f64 * b2));
        }
        if n2 < k {
            out.push((self.mode_index(n1, n2 + 1), (k - n2) as f64 * a2));
        }
        if n1 < k {
            out.push((self.mode_index(n1 + 1, n2), (k - n1) as f64 * a1));
        }
    }
}

/// Upper bounds of `(α_i, β_i)` over a voltage interval: `cosh(z/2)` is convex
/// so its maximum sits at an endpoint, and `1 ± tanh z` is monotone.
fn rate_bounds(lo: f64, hi: f64, channel: usize, params: &MorrisLecarParams) -> (f64, f64) {
    let k = channel - 1;
    let zl = (lo - params.half_activation[k]) / params.slope[k];
    let zh = (hi - params.half_activation[k]) / params.slope[k];
    let envelope = params.rate_scale[k] * (0.5 * zl).cosh().max((0.5 * zh).cosh());
    (envelope * (1.0 + zh.tanh()), envelope * (1.0 - zl.tanh()))
}

impl PdmpModel for MorrisLecarModel {
    fn dim(&self) -> usize {
        1
    }

    fn mode_count(&self) -> usize {
        (self.params.channels + 1).pow(2)
    }

    fn flow_kind(&self) -> FlowKind {
        FlowKind::ClosedForm
    }

    fn field(&self, mode: usize, x: &[f64], out: &mut [f64]) {
        let (kappa, rest) = self.relaxation(mode);
        out[0] = -kappa * (x[0] - rest);
    }

    fn closed_form_flow(&self, mode: usize, x: &[f64], dt: f64, out: &mut [f64]) -> bool {
        let (kappa, rest) = self.relaxation(mode);
        out[0] = rest + (x[0] - rest) * (-kappa * dt).exp();
        true
    }

    fn rate(&self, state: &HybridState) -> f64 {
        let mut out = Vec::with_capacity(4);
        self.transitions(state, &mut out);
        out.iter().map(|t| t.1).sum()
    }

    /// The voltage relaxes monotonically, so along `[0, dt]` it stays between
    /// its two end values.
    fn segment_bound(&self, state: &HybridState, dt: f64) -> f64 {
        let v0 = state.x[0];
        let (kappa, rest) = self.relaxation(state.mode);
        let v1 = if dt.is_finite() {
            rest + (v0 - rest) * (-kappa * dt).exp()
        } else {
            rest
        };
        let (lo, hi) = (v0.min(v1), v0.max(v1));
        let k = self.params.channels;
        let (n1, n2) = self.counts(state.mode);
        let (a1, b1) = rate_bounds(lo, hi, 1, &self.params);
        let (a2, b2) = rate_bounds(lo, hi, 2, &self.params);
        (k - n1) as f64 * a1 + n1 as f64 * b1 + (k - n2) as f64 * a2 + n2 as f64 * b2
    }

    fn sample_jump(&self, pre: &HybridState, rng: &mut RandomSource) -> HybridState {
        let mut out = Vec::with_capacity(4);
        self.transitions(pre, &mut out);
        HybridState {
            x: pre.x.clone(),
            mode: pick_by_cdf(&out, rng.uniform()),
        }
    }

    fn switch_rates(&self, state: &HybridState, out: &mut Vec<(usize, f64)>) -> bool {
        self.transitions(state, out);
        true
    }
}

/// Invariant voltage segment `[0, max(V_1, V_2, V_3 + (I + 1)/g_3)]`.
///
/// Fails when some voltage field does not point into the segment at an end
/// point, which happens for parameters outside the model's positive regime
/// (negative `I` or reversal potentials).
pub fn voltage_segment(params: &MorrisLecarParams) -> Result<Interval, ModelError> {
    let p = params;
    let hi = p.reversal[0]
        .max(p.reversal[1])
        .max(p.reversal[2] + (p.current + 1.0) / p.conductance[2]);
    let segment = Interval { lo: 0.0, hi };
    // The field is affine in (u_1, u_2), so the corners decide.
    for (u1, u2) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
        let field = |v: f64| {
            (p.current
                - p.conductance[0] * u1 * (v - p.reversal[0])
                - p.conductance[1] * u2 * (v - p.reversal[1])
                - p.conductance[2] * (v - p.reversal[2]))
                / p.capacitance
        };
        if field(segment.lo) < 0.0 || field(segment.hi) > 0.0 {
            return Err(ModelError::NotInvariant(format!(
                "field of (u1, u2) = ({u1}, {u2}) points out of [{}, {}]",
                segment.lo, segment.hi
            )));
        }
    }
    Ok(segment)
}

/// Uniform dissipation constant `g_3 / C` of the voltage fields.
pub fn dissipation_constant(params: &MorrisLecarParams) -> f64 {
    params.conductance[2] / params.capacitance
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> MorrisLecarParams {
        MorrisLecarParams::reference()
    }

    #[test]
    fn rates_at_half_activation() {
        let p = params();
        for channel in [1, 2] {
            let (a, b) = morris_lecar_rates(p.half_activation[channel - 1], channel, &p);
            assert_eq!(a, p.rate_scale[channel - 1]);
            assert_eq!(b, p.rate_scale[channel - 1]);
        }
    }

    #[test]
    fn segment_for_unit_example() {
        let mut p = params();
        p.reversal = [0.0, 0.0, 1.0];
        p.current = 0.0;
        p.conductance[2] = 1.0;
        let s = voltage_segment(&p).unwrap();
        assert_eq!((s.lo, s.hi), (0.0, 2.0));
    }

    #[test]
    fn negative_reversal_breaks_invariance() {
        let mut p = params();
        p.reversal = [120.0, -84.0, -60.0];
        assert!(voltage_segment(&p).is_err());
    }

    #[test]
    fn mode_encoding_is_bijective() {
        let m = MorrisLecarModel { params: params() };
        let k = m.channels();
        for n1 in 0..=k {
            for n2 in 0..=k {
                assert_eq!(m.counts(m.mode_index(n1, n2)), (n1, n2));
            }
        }
        assert_eq!(m.mode_count(), (k + 1) * (k + 1));
    }

    #[test]
    fn bound_dominates_rate_along_flow() {
        let m = MorrisLecarModel { params: params() };
        for mode in [0, 5, 37, 60, 120] {
            for v0 in [0.0, 30.0, 75.0, 119.0] {
                let s = HybridState::scalar(v0, mode);
                let dt = 3.0;
                let bound = m.segment_bound(&s, dt);
                for j in 0..=100 {
                    let mut out = [0.0];
                    m.closed_form_flow(mode, &[v0], dt * j as f64 / 100.0, &mut out);
                    let r = m.rate(&HybridState::scalar(out[0], mode));
                    assert!(r <= bound * (1.0 + 1e-12), "mode {mode} v0 {v0}: {r} > {bound}");
                }
            }
        }
    }
}
