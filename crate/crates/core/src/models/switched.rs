//! Switched flows: the randomly switched linear system with the two Hurwitz
//! matrices, the one-dimensional two-attractor example, the planar rotation
//! fields, and the deterministic switched system with its worst trajectory.

use super::ModelError;
use crate::engine::{AffineField, FlowKind, HybridState, PdmpModel, RateProfile};
use crate::rng::RandomSource;

/// `ẋ = A_i x` with `A_0 = [[-α, 1], [0, -α]]`, `A_1 = [[-α, 0], [-1, -α]]`,
/// the mode flipping at constant rate `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct SwitchedLinearModel {
    pub alpha: f64,
    pub r: f64,
}

impl SwitchedLinearModel {
    /// Row-major matrix of mode `i`.
    pub fn matrix(&self, mode: usize) -> [f64; 4] {
        let a = self.alpha;
        if mode == 0 {
            [-a, 1.0, 0.0, -a]
        } else {
            [-a, 0.0, -1.0, -a]
        }
    }

    /// Exact image of `(y, z)` under `e^{A_i t}`.
    pub fn flow_point(&self, mode: usize, p: [f64; 2], t: f64) -> [f64; 2] {
        let decay = (-self.alpha * t).exp();
        let [y, z] = p;
        if mode == 0 {
            [(z * t + y) * decay, z * decay]
        } else {
            [y * decay, (z - y * t) * decay]
        }
    }
}

fn flip(pre: &HybridState) -> HybridState {
    HybridState {
        x: pre.x.clone(),
        mode: 1 - pre.mode,
    }
}

impl PdmpModel for SwitchedLinearModel {
    fn dim(&self) -> usize {
        2
    }

    fn mode_count(&self) -> usize {
        2
    }

    fn flow_kind(&self) -> FlowKind {
        FlowKind::ClosedForm
    }

    fn field(&self, mode: usize, x: &[f64], out: &mut [f64]) {
        let m = self.matrix(mode);
        out[0] = m[0] * x[0] + m[1] * x[1];
        out[1] = m[2] * x[0] + m[3] * x[1];
    }

    fn closed_form_flow(&self, mode: usize, x: &[f64], dt: f64, out: &mut [f64]) -> bool {
        let p = self.flow_point(mode, [x[0], x[1]], dt);
        out.copy_from_slice(&p);
        true
    }

    fn affine_field(&self, mode: usize) -> Option<AffineField> {
        Some(AffineField {
            matrix: self.matrix(mode).to_vec(),
            offset: vec![0.0, 0.0],
        })
    }

    fn rate(&self, _state: &HybridState) -> f64 {
        self.r
    }

    fn rate_profile(&self, _state: &HybridState) -> RateProfile {
        RateProfile::Constant(self.r)
    }

    fn segment_bound(&self, _state: &HybridState, _dt: f64) -> f64 {
        self.r
    }

    fn sample_jump(&self, pre: &HybridState, _rng: &mut RandomSource) -> HybridState {
        flip(pre)
    }

    fn switch_rates(&self, state: &HybridState, out: &mut Vec<(usize, f64)>) -> bool {
        out.clear();
        out.push((1 - state.mode, self.r));
        true
    }
}

/// `ẋ = -α_i (x - i)` on ℝ, leaving mode `i` at rate `λ_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dim1Model {
    pub alpha: [f64; 2],
    pub lambda: [f64; 2],
}

impl PdmpModel for Dim1Model {
    fn dim(&self) -> usize {
        1
    }

    fn mode_count(&self) -> usize {
        2
    }

    fn flow_kind(&self) -> FlowKind {
        FlowKind::ClosedForm
    }

    fn field(&self, mode: usize, x: &[f64], out: &mut [f64]) {
        out[0] = -self.alpha[mode] * (x[0] - mode as f64);
    }

    fn closed_form_flow(&self, mode: usize, x: &[f64], dt: f64, out: &mut [f64]) -> bool {
        let target = mode as f64;
        out[0] = target + (x[0] - target) * (-self.alpha[mode] * dt).exp();
        true
    }

    fn affine_field(&self, mode: usize) -> Option<AffineField> {
        Some(AffineField {
            matrix: vec![-self.alpha[mode]],
            offset: vec![self.alpha[mode] * mode as f64],
        })
    }

    fn rate(&self, state: &HybridState) -> f64 {
        self.lambda[state.mode]
    }

    fn rate_profile(&self, state: &HybridState) -> RateProfile {
        RateProfile::Constant(self.lambda[state.mode])
    }

    fn segment_bound(&self, state: &HybridState, _dt: f64) -> f64 {
        self.lambda[state.mode]
    }

    fn sample_jump(&self, pre: &HybridState, _rng: &mut RandomSource) -> HybridState {
        flip(pre)
    }

    fn switch_rates(&self, state: &HybridState, out: &mut Vec<(usize, f64)>) -> bool {
        out.clear();
        out.push((1 - state.mode, self.lambda[state.mode]));
        true
    }
}

/// `F^0(x) = A x`, `F^1(x) = A (x - a)` with `A = [[-1, -1], [1, -1]]` and
/// `a = (1, 0)`; constant flip rates `λ_0`, `λ_1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarRotationModel {
    pub lambda: [f64; 2],
}

impl PlanarRotationModel {
    pub const MATRIX: [f64; 4] = [-1.0, -1.0, 1.0, -1.0];
    pub const SHIFT: [f64; 2] = [1.0, 0.0];

    fn center(mode: usize) -> [f64; 2] {
        if mode == 0 {
            [0.0, 0.0]
        } else {
            Self::SHIFT
        }
    }
}

impl PdmpModel for PlanarRotationModel {
    fn dim(&self) -> usize {
        2
    }

    fn mode_count(&self) -> usize {
        2
    }

    fn flow_kind(&self) -> FlowKind {
        FlowKind::ClosedForm
    }

    fn field(&self, mode: usize, x: &[f64], out: &mut [f64]) {
        let c = Self::center(mode);
        let (u, v) = (x[0] - c[0], x[1] - c[1]);
        let m = Self::MATRIX;
        out[0] = m[0] * u + m[1] * v;
        out[1] = m[2] * u + m[3] * v;
    }

    /// `e^{At} = e^{-t} R(t)` with `R(t)` the rotation by angle `t`.
    fn closed_form_flow(&self, mode: usize, x: &[f64], dt: f64, out: &mut [f64]) -> bool {
        let c = Self::center(mode);
        let (u, v) = (x[0] - c[0], x[1] - c[1]);
        let decay = (-dt).exp();
        let (s, co) = dt.sin_cos();
        out[0] = c[0] + decay * (co * u - s * v);
        out[1] = c[1] + decay * (s * u + co * v);
        true
    }

    fn affine_field(&self, mode: usize) -> Option<AffineField> {
        let c = Self::center(mode);
        let m = Self::MATRIX;
        Some(AffineField {
            matrix: m.to_vec(),
            offset: vec![-(m[0] * c[0] + m[1] * c[1]), -(m[2] * c[0] + m[3] * c[1])],
        })
    }

    fn rate(&self, state: &HybridState) -> f64 {
        self.lambda[state.mode]
    }

    fn rate_profile(&self, state: &HybridState) -> RateProfile {
        RateProfile::Constant(self.lambda[state.mode])
    }

    fn segment_bound(&self, state: &HybridState, _dt: f64) -> f64 {
        self.lambda[state.mode]
    }

    fn sample_jump(&self, pre: &HybridState, _rng: &mut RandomSource) -> HybridState {
        flip(pre)
    }

    fn switch_rates(&self, state: &HybridState, out: &mut Vec<(usize, f64)>) -> bool {
        out.clear();
        out.push((1 - state.mode, self.lambda[state.mode]));
        true
    }
}

/// `(γ⁺, γ⁻)`, the slopes of the two lines where `A_0 x` and `A_1 x` are
/// collinear.
pub fn collinearity_slopes(alpha: f64) -> (f64, f64) {
    let s = (1.0 + 4.0 * alpha * alpha).sqrt();
    ((1.0 + s) / (2.0 * alpha), (1.0 - s) / (2.0 * alpha))
}

/// The deterministic system `ẋ = (1 - u_t) A_0 x + u_t A_1 x` driven by a
/// user-chosen mode schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct DeterministicSwitched {
    pub system: SwitchedLinearModel,
}

impl DeterministicSwitched {
    pub fn new(alpha: f64) -> Self {
        Self {
            system: SwitchedLinearModel { alpha, r: 1.0 },
        }
    }

    /// Runs the `(mode, duration)` pieces in order and returns the state at the
    /// end of each piece.
    pub fn run(&self, start: [f64; 2], schedule: &[(usize, f64)]) -> Vec<[f64; 2]> {
        let mut p = start;
        schedule
            .iter()
            .map(|&(mode, duration)| {
                p = self.system.flow_point(mode, p, duration);
                p
            })
            .collect()
    }
}

/// Switching times and end points of one turn of the worst trajectory started
/// at `(0, 1)` in mode 0.
#[derive(Clone, Debug, PartialEq)]
pub struct WorstCycle {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    /// `x_{t₁}`, on the line `y = γ⁺ z`.
    pub first_switch: [f64; 2],
    /// `x_{t₂}`, on the line `y = γ⁻ z`.
    pub second_switch: [f64; 2],
    /// `x_{t₃}`, back on the vertical axis.
    pub terminal: [f64; 2],
    /// `‖x_{t₃}‖`; the system is unbounded iff this exceeds 1.
    pub growth: f64,
}

impl WorstCycle {
    /// The mode schedule realizing the cycle.
    pub fn schedule(&self) -> [(usize, f64); 3] {
        [(0, self.t1), (1, self.t2 - self.t1), (0, self.t3 - self.t2)]
    }
}

/// Closed-form worst trajectory: mode 0 until `y = γ⁺ z`, mode 1 until
/// `y = γ⁻ z`, mode 0 until `y = 0`.
pub fn worst_trajectory_cycle(alpha: f64) -> Result<WorstCycle, ModelError> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(ModelError::constraint(
            "switched-linear",
            "worst trajectory requires alpha > 0",
        ));
    }
    let (gp, gm) = collinearity_slopes(alpha);
    let t1 = gp;
    let t2 = t1 + gp - gm;
    let t3 = t2 - gm;
    let e1 = (-alpha * gp).exp();
    let e2 = (-alpha * (2.0 * gp - gm)).exp();
    let e3 = (-2.0 * alpha * (gp - gm)).exp();
    let terminal = [0.0, -gp * gp * e3];
    Ok(WorstCycle {
        t1,
        t2,
        t3,
        first_switch: [gp * e1, e1],
        second_switch: [gp * e2, -gp * gp * e2],
        terminal,
        growth: gp * gp * e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slopes_at_one_half() {
        let (gp, gm) = collinearity_slopes(0.5);
        assert!((gp - (1.0 + 2f64.sqrt())).abs() < 1e-14);
        assert!((gm - (1.0 - 2f64.sqrt())).abs() < 1e-14);
        assert!((gp - 2.41421).abs() < 1e-5);
    }

    #[test]
    fn collinearity_lines_zero_the_determinant() {
        // Q(y, z) = α y² - y z - α z² vanishes on y = γ± z.
        for alpha in [0.1, 0.3314, 0.5, 2.0] {
            let (gp, gm) = collinearity_slopes(alpha);
            for g in [gp, gm] {
                let q = alpha * g * g - g - alpha;
                assert!(q.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn worst_cycle_schedule_reproduces_closed_form() {
        for alpha in [0.05, 0.2, 0.3314, 0.45, 0.9] {
            let cycle = worst_trajectory_cycle(alpha).unwrap();
            let states = DeterministicSwitched::new(alpha).run([0.0, 1.0], &cycle.schedule());
            for (got, want) in states
                .iter()
                .zip([cycle.first_switch, cycle.second_switch, cycle.terminal])
            {
                for k in 0..2 {
                    assert!((got[k] - want[k]).abs() < 1e-8, "alpha {alpha}: {got:?} vs {want:?}");
                }
            }
        }
    }

    #[test]
    fn second_switch_lies_on_lower_line() {
        let alpha = 0.3;
        let (_, gm) = collinearity_slopes(alpha);
        let c = worst_trajectory_cycle(alpha).unwrap();
        assert!((c.second_switch[0] - gm * c.second_switch[1]).abs() < 1e-12);
    }

    #[test]
    fn nonpositive_alpha_rejected() {
        assert!(worst_trajectory_cycle(0.0).is_err());
        assert!(worst_trajectory_cycle(-1.0).is_err());
    }

    #[test]
    fn rotation_closed_form_matches_affine_coefficients() {
        let m = PlanarRotationModel { lambda: [1.0, 1.0] };
        let f = m.affine_field(1).unwrap();
        let x = [0.3, -0.7];
        let mut direct = [0.0; 2];
        m.field(1, &x, &mut direct);
        let via = [
            f.matrix[0] * x[0] + f.matrix[1] * x[1] + f.offset[0],
            f.matrix[2] * x[0] + f.matrix[3] * x[1] + f.offset[1],
        ];
        assert!((direct[0] - via[0]).abs() < 1e-15 && (direct[1] - via[1]).abs() < 1e-15);
    }
}
