//! Analytic ground truth: closed forms, exact rational computations and
//! quadratures against which simulations are checked.

mod densities;
mod lyapunov;
mod stability;
mod storage;
mod tcp;

pub use densities::{
    dim1_invariant_density, dim1_mode_law, dim1_mode_weights, dissipativity_estimate,
    mixture_eigenvalues, telegraph_invariant_density,
};
pub use lyapunov::{g_argmax, g_curve, lyapunov_quadrature, lyapunov_quadrature_with, LyapunovBreakdown};
pub use stability::{stability_r, stability_root, StabilityClass, StabilityReport};
pub use storage::{storage_laplace, storage_mean};
pub use tcp::{
    tcp_eigenpoly, tcp_eigenpoly_exact, tcp_generator_exact, tcp_invariant_moment,
    tcp_invariant_moment_exact, tcp_moment, tcp_pairing_integral, tcp_pairing_integral_exact,
    RationalPoly, PRINTED_P1_P2_PAIRING,
};

use thiserror::Error;

use crate::quadrature::QuadratureError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

pub type Result<T> = std::result::Result<T, OracleError>;

pub(crate) fn domain(msg: impl Into<String>) -> OracleError {
    OracleError::Domain(msg.into())
}
