//! One-dimensional, single-mode models whose jumps move the continuous state:
//! storage, bandit, TCP and general AIMD.

use super::spec::{AimdRate, AimdSpec, JumpLaw};
use crate::engine::{FlowKind, HybridState, PdmpModel, RateProfile};
use crate::rng::RandomSource;

/// Stock decaying at rate `beta`, refilled by Exp(1) amounts at rate `alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct StorageModel {
    pub alpha: f64,
    pub beta: f64,
}

impl PdmpModel for StorageModel {
    fn dim(&self) -> usize {
        1
    }

    fn mode_count(&self) -> usize {
        1
    }

    fn flow_kind(&self) -> FlowKind {
        FlowKind::ClosedForm
    }

    fn field(&self, _mode: usize, x: &[f64], out: &mut [f64]) {
        out[0] = -self.beta * x[0];
    }

    fn closed_form_flow(&self, _mode: usize, x: &[f64], dt: f64, out: &mut [f64]) -> bool {
        out[0] = x[0] * (-self.beta * dt).exp();
        true
    }

    fn rate(&self, _state: &HybridState) -> f64 {
        self.alpha
    }

    fn rate_profile(&self, _state: &HybridState) -> RateProfile {
        RateProfile::Constant(self.alpha)
    }

    fn segment_bound(&self, _state: &HybridState, _dt: f64) -> f64 {
        self.alpha
    }

    fn sample_jump(&self, pre: &HybridState, rng: &mut RandomSource) -> HybridState {
        HybridState::scalar(pre.x[0] + rng.exp1(), 0)
    }
}

/// Bandit-algorithm process: drift `1 - p - p·y`, jumps of size `g` at rate
/// `q·y/g`.
#[derive(Clone, Debug, PartialEq)]
pub struct BanditModel {
    pub p: f64,
    pub q: f64,
    pub g: f64,
}

impl BanditModel {
    /// Rest point `(1 - p)/p` of the drift.
    pub fn equilibrium(&self) -> f64 {
        (1.0 - self.p) / self.p
    }
}

impl PdmpModel for BanditModel {
    fn dim(&self) -> usize {
        1
    }

    fn mode_count(&self) -> usize {
        1
    }

    fn flow_kind(&self) -> FlowKind {
        FlowKind::ClosedForm
    }

    fn field(&self, _mode: usize, x: &[f64], out: &mut [f64]) {
        out[0] = 1.0 - self.p - self.p * x[0];
    }

    fn closed_form_flow(&self, _mode: usize, x: &[f64], dt: f64, out: &mut [f64]) -> bool {
        let eq = self.equilibrium();
        out[0] = eq + (x[0] - eq) * (-self.p * dt).exp();
        true
    }

    fn rate(&self, state: &HybridState) -> f64 {
        self.q * state.x[0].max(0.0) / self.g
    }

    /// The flow moves `y` monotonically toward the rest point, so the rate
    /// along a jump-free segment never exceeds `(q/g)·max(y, (1-p)/p)`.
    fn segment_bound(&self, state: &HybridState, _dt: f64) -> f64 {
        self.q / self.g * state.x[0].max(self.equilibrium()).max(0.0)
    }

    fn sample_jump(&self, pre: &HybridState, _rng: &mut RandomSource) -> HybridState {
        HybridState::scalar(pre.x[0] + self.g, 0)
    }

    fn contains(&self, state: &HybridState) -> bool {
        state.x.len() == 1 && state.mode == 0 && state.x[0] >= 0.0 && state.x[0].is_finite()
    }
}

/// TCP window: unit linear growth, halved at the events of a rate-`lambda`
/// Poisson process.
#[derive(Clone, Debug, PartialEq)]
pub struct TcpModel {
    pub lambda: f64,
}

impl PdmpModel for TcpModel {
    fn dim(&self) -> usize {
        1
    }

    fn mode_count(&self) -> usize {
        1
    }

    fn flow_kind(&self) -> FlowKind {
        FlowKind::ClosedForm
    }

    fn field(&self, _mode: usize, _x: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
    }

    fn closed_form_flow(&self, _mode: usize, x: &[f64], dt: f64, out: &mut [f64]) -> bool {
        out[0] = x[0] + dt;
        true
    }

    fn rate(&self, _state: &HybridState) -> f64 {
        self.lambda
    }

    fn rate_profile(&self, _state: &HybridState) -> RateProfile {
        RateProfile::Constant(self.lambda)
    }

    fn segment_bound(&self, _state: &HybridState, _dt: f64) -> f64 {
        self.lambda
    }

    fn sample_jump(&self, pre: &HybridState, _rng: &mut RandomSource) -> HybridState {
        HybridState::scalar(pre.x[0] / 2.0, 0)
    }

    fn contains(&self, state: &HybridState) -> bool {
        state.x.len() == 1 && state.mode == 0 && state.x[0] >= 0.0 && state.x[0].is_finite()
    }
}

/// Additive-increase multiplicative-decrease window with rate `λ(x)` and
/// multiplicative jump law `ν`.
#[derive(Clone, Debug)]
pub struct AimdModel {
    pub spec: AimdSpec,
}

impl AimdModel {
    pub fn jump_law(&self) -> &JumpLaw {
        &self.spec.jump
    }
}

impl PdmpModel for AimdModel {
    fn dim(&self) -> usize {
        1
    }

    fn mode_count(&self) -> usize {
        1
    }

    fn flow_kind(&self) -> FlowKind {
        FlowKind::ClosedForm
    }

    fn field(&self, _mode: usize, _x: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
    }

    fn closed_form_flow(&self, _mode: usize, x: &[f64], dt: f64, out: &mut [f64]) -> bool {
        out[0] = x[0] + dt;
        true
    }

    fn rate(&self, state: &HybridState) -> f64 {
        let x = state.x[0];
        match &self.spec.rate {
            AimdRate::Constant(c) => *c,
            AimdRate::Linear { intercept, slope } => intercept + slope * x,
            AimdRate::Custom { rate, .. } => rate(x),
        }
    }

    fn rate_profile(&self, _state: &HybridState) -> RateProfile {
        match &self.spec.rate {
            AimdRate::Constant(c) => RateProfile::Constant(*c),
            _ => RateProfile::Bounded,
        }
    }

    fn segment_bound(&self, state: &HybridState, dt: f64) -> f64 {
        let x = state.x[0];
        match &self.spec.rate {
            AimdRate::Constant(c) => *c,
            AimdRate::Linear { intercept, slope } => intercept + slope * (x + dt),
            AimdRate::Custom { bound, .. } => bound(x, dt),
        }
    }

    fn sample_jump(&self, pre: &HybridState, rng: &mut RandomSource) -> HybridState {
        HybridState::scalar(pre.x[0] * self.spec.jump.quantile(rng.uniform()), 0)
    }

    fn contains(&self, state: &HybridState) -> bool {
        state.x.len() == 1 && state.mode == 0 && state.x[0] >= 0.0 && state.x[0].is_finite()
    }
}
