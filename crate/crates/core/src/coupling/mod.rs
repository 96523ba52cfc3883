//! Couplings of two copies of a process and empirical distances between
//! samples.

mod distance;
mod lyapunov;
mod pair;
mod tv;

pub use distance::{default_bin_width, empirical_tv, empirical_wasserstein};
pub use lyapunov::lyapunov_mc;
pub use pair::{couple_shared_noise, couple_switched};
pub use tv::{couple_tv_storage, couple_tv_tcp, maximal_shifted_exponentials, rotate_uniform};

use thiserror::Error;

use crate::engine::{EngineError, HybridState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CouplingError {
    #[error("coupling `{coupling}` does not support the {model} model")]
    Unsupported {
        coupling: &'static str,
        model: &'static str,
    },
    #[error("{0}")]
    Contract(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

pub type Result<T> = std::result::Result<T, CouplingError>;

/// Outcome of one coupled run of two copies.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledRun {
    pub first: HybridState,
    pub second: HybridState,
    /// The coupling succeeded; from `coalescence_time` on both paths agree.
    pub coalesced: bool,
    pub coalescence_time: Option<f64>,
    /// `(time, distance)` at the requested sample times.
    pub distances: Vec<(f64, f64)>,
    /// Jumps of each copy on `[0, t]`.
    pub jumps: [usize; 2],
}

impl CoupledRun {
    /// `|x - x̃| + 1{i ≠ ĩ}` between the terminal states.
    pub fn terminal_distance(&self) -> f64 {
        state_distance(&self.first, &self.second)
    }
}

/// Euclidean distance plus one when the modes differ.
pub fn state_distance(a: &HybridState, b: &HybridState) -> f64 {
    let d2: f64 = a.x.iter().zip(&b.x).map(|(p, q)| (p - q).powi(2)).sum();
    d2.sqrt() + if a.mode == b.mode { 0.0 } else { 1.0 }
}

/// Estimate of a distance between two laws from samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceEstimate {
    pub value: f64,
    pub std_err: f64,
    pub count: usize,
}
