use smallvec::smallvec;

use crate::engine::{FlowKind, HybridState, PdmpModel, RateProfile};
use crate::rng::RandomSource;

/// Ergodic telegraph process: position `x` moves at velocity `v ∈ {-1, +1}`,
/// and `v` flips at rate `b` when moving away from 0, `a` when moving toward
/// it. Mode 0 encodes `v = -1`, mode 1 encodes `v = +1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TelegraphModel {
    pub a: f64,
    pub b: f64,
}

pub fn velocity(mode: usize) -> f64 {
    if mode == 0 {
        -1.0
    } else {
        1.0
    }
}

pub fn mode_of_velocity(v: f64) -> usize {
    usize::from(v > 0.0)
}

impl PdmpModel for TelegraphModel {
    fn dim(&self) -> usize {
        1
    }

    fn mode_count(&self) -> usize {
        2
    }

    fn flow_kind(&self) -> FlowKind {
        FlowKind::ClosedForm
    }

    fn field(&self, mode: usize, _x: &[f64], out: &mut [f64]) {
        out[0] = velocity(mode);
    }

    fn closed_form_flow(&self, mode: usize, x: &[f64], dt: f64, out: &mut [f64]) -> bool {
        out[0] = x[0] + velocity(mode) * dt;
        true
    }

    /// `a + (b - a)·1{x v > 0}`, strict inequality.
    fn rate(&self, state: &HybridState) -> f64 {
        if state.x[0] * velocity(state.mode) > 0.0 {
            self.b
        } else {
            self.a
        }
    }

    /// Moving toward 0 the rate is `a` for `|x|` time units, then `b` forever.
    fn rate_profile(&self, state: &HybridState) -> RateProfile {
        let xv = state.x[0] * velocity(state.mode);
        if xv > 0.0 {
            RateProfile::Constant(self.b)
        } else {
            RateProfile::Piecewise {
                pieces: smallvec![(self.a, state.x[0].abs())],
                tail: self.b,
            }
        }
    }

    fn segment_bound(&self, _state: &HybridState, _dt: f64) -> f64 {
        self.b
    }

    fn sample_jump(&self, pre: &HybridState, _rng: &mut RandomSource) -> HybridState {
        HybridState {
            x: pre.x.clone(),
            mode: 1 - pre.mode,
        }
    }

    fn switch_rates(&self, state: &HybridState, out: &mut Vec<(usize, f64)>) -> bool {
        out.clear();
        out.push((1 - state.mode, self.rate(state)));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_rates_follow_direction() {
        let m = TelegraphModel { a: 1.0, b: 2.0 };
        assert_eq!(m.rate(&HybridState::scalar(1.0, mode_of_velocity(1.0))), 2.0);
        assert_eq!(m.rate(&HybridState::scalar(1.0, mode_of_velocity(-1.0))), 1.0);
        // x = 0 is evaluated with the strict indicator.
        assert_eq!(m.rate(&HybridState::scalar(0.0, 1)), 1.0);
    }

    #[test]
    fn profile_breakpoint_at_origin_crossing() {
        let m = TelegraphModel { a: 1.0, b: 3.0 };
        match m.rate_profile(&HybridState::scalar(2.5, 0)) {
            RateProfile::Piecewise { pieces, tail } => {
                assert_eq!(pieces.as_slice(), &[(1.0, 2.5)]);
                assert_eq!(tail, 3.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
