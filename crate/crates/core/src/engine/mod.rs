//! Generic exact simulation of piecewise deterministic Markov processes.
//!
//! A model supplies three local characteristics: a flow per discrete mode, a
//! state-dependent jump rate, and a post-jump kernel. The engine moves the
//! state along the flow, draws jump times whose survival function is exactly
//! `exp(-∫ rate(flow_s(x)) ds)`, and lets the kernel pick the post-jump state.
//!
//! Jump times are drawn in one of three ways, chosen by the model per state
//! through [`RateProfile`]:
//! - a rate that stays constant along the flow is inverted directly;
//! - a rate that is piecewise constant along the flow is inverted across its
//!   breakpoints;
//! - anything else is thinned against [`PdmpModel::segment_bound`].

mod flow;
mod jump;
mod simulate;

pub use flow::{advance_flow, rk4_flow};
pub use jump::{pick_by_cdf, sample_next_jump, JumpEvent};
pub use simulate::{run, sample_at, simulate, Event, Outcome, RunSummary, Trajectory};

use smallvec::SmallVec;
use thiserror::Error;

use crate::rng::RandomSource;

/// Any coordinate with absolute value above this is declared exploded.
pub const EXPLOSION_THRESHOLD: f64 = 1e12;

/// Continuous coordinates of a hybrid state. Every model here has `d <= 2`.
pub type Coords = SmallVec<[f64; 2]>;

/// The PDMP state `(x, i)`: a point of ℝ^d and a mode index.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridState {
    pub x: Coords,
    pub mode: usize,
}

impl HybridState {
    pub fn new(x: &[f64], mode: usize) -> Self {
        Self {
            x: Coords::from_slice(x),
            mode,
        }
    }

    pub fn scalar(x: f64, mode: usize) -> Self {
        Self::new(&[x], mode)
    }

    pub fn norm(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub(crate) fn exploded(&self) -> bool {
        self.x
            .iter()
            .any(|v| !v.is_finite() || v.abs() > EXPLOSION_THRESHOLD)
    }
}

/// How a model's flow is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowKind {
    /// The model implements [`PdmpModel::closed_form_flow`].
    ClosedForm,
    /// `F^i(x) = M_i x + c_i`, solved exactly through a matrix exponential.
    Affine,
    /// Only the vector field is known; integrated by fixed-step RK4.
    GenericOde,
}

/// Affine vector field `x ↦ matrix·x + offset`, `matrix` stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineField {
    pub matrix: Vec<f64>,
    pub offset: Vec<f64>,
}

/// Behaviour of the jump rate along the jump-free flow from a given state.
#[derive(Clone, Debug, PartialEq)]
pub enum RateProfile {
    /// The rate keeps this value until the next jump.
    Constant(f64),
    /// `(rate, duration)` pieces traversed in order, then `tail` forever.
    Piecewise {
        pieces: SmallVec<[(f64, f64); 2]>,
        tail: f64,
    },
    /// No usable structure; thin against the model's segment bound.
    Bounded,
}

/// Local characteristics of a PDMP.
pub trait PdmpModel: Send + Sync {
    fn dim(&self) -> usize;

    fn mode_count(&self) -> usize;

    fn flow_kind(&self) -> FlowKind;

    /// Vector field `F^mode(x)` written into `out`.
    fn field(&self, mode: usize, x: &[f64], out: &mut [f64]);

    /// Exact flow image; required when `flow_kind` is `ClosedForm`.
    fn closed_form_flow(&self, _mode: usize, _x: &[f64], _dt: f64, _out: &mut [f64]) -> bool {
        false
    }

    /// Affine coefficients of the field; required when `flow_kind` is `Affine`.
    fn affine_field(&self, _mode: usize) -> Option<AffineField> {
        None
    }

    /// Total jump rate at `state`.
    fn rate(&self, state: &HybridState) -> f64;

    fn rate_profile(&self, _state: &HybridState) -> RateProfile {
        RateProfile::Bounded
    }

    /// Upper bound of the rate along the flow from `state` over `[0, dt]`.
    fn segment_bound(&self, state: &HybridState, dt: f64) -> f64;

    /// Draws the post-jump state from the kernel at the pre-jump state.
    fn sample_jump(&self, pre: &HybridState, rng: &mut RandomSource) -> HybridState;

    /// For models whose jumps only change the mode: the `(target, rate)` pairs
    /// of `λ(x, i, j)`. Returns `false` when jumps move the continuous part.
    fn switch_rates(&self, _state: &HybridState, _out: &mut Vec<(usize, f64)>) -> bool {
        false
    }

    /// Whether `state` lies in the model's declared state space.
    fn contains(&self, state: &HybridState) -> bool {
        state.x.len() == self.dim()
            && state.mode < self.mode_count()
            && state.x.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("contract violation: {0}")]
    Contract(String),
    /// A coordinate left the finite region; `elapsed` is measured from the
    /// state handed to the failing call.
    #[error("state exploded after {elapsed} time units")]
    Overflow { elapsed: f64 },
    #[error("segment bound {bound} is below the observed rate {rate}")]
    BoundViolation { bound: f64, rate: f64 },
    #[error("invalid segment bound {0}")]
    InvalidBound(f64),
}

pub type Result<T> = std::result::Result<T, EngineError>;

pub(crate) fn check_state<M: PdmpModel + ?Sized>(model: &M, state: &HybridState) -> Result<()> {
    if state.x.len() != model.dim() {
        return Err(EngineError::Contract(format!(
            "state has dimension {} but the model declares {}",
            state.x.len(),
            model.dim()
        )));
    }
    if state.mode >= model.mode_count() {
        return Err(EngineError::Contract(format!(
            "mode {} out of range for {} modes",
            state.mode,
            model.mode_count()
        )));
    }
    Ok(())
}
