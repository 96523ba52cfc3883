//! Exact-event simulation and analytics for piecewise deterministic Markov
//! processes.
//!
//! - [`engine`]: flows, jump-time sampling, trajectories.
//! - [`models`]: storage, bandit, TCP/AIMD, switched linear systems, the
//!   one-dimensional and planar switched flows, the telegraph process and the
//!   stochastic Morris–Lecar neuron.
//! - [`oracles`]: closed forms and quadratures used as ground truth.
//! - [`coupling`]: coupling constructions and empirical distances.

pub mod coupling;
pub mod engine;
pub mod models;
pub mod montecarlo;
pub mod oracles;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use engine::{HybridState, PdmpModel};
pub use models::{build_model, Model, ModelSpec};
pub use rng::RandomSource;
