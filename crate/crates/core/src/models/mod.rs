//! The model zoo: validated constructors for every PDMP studied here.

mod custom;
mod morris_lecar;
mod scalar;
mod spec;
mod switched;
mod telegraph;

pub use custom::CustomModel;
pub use morris_lecar::{
    dissipation_constant, morris_lecar_rates, voltage_segment, Interval, MorrisLecarModel,
};
pub use scalar::{AimdModel, BanditModel, StorageModel, TcpModel};
pub use spec::{
    AimdRate, AimdSpec, BoundFn, JumpLaw, ModelSpec, MorrisLecarParams, QuantileFn, RateFn, VARIANTS,
};
pub use switched::{
    collinearity_slopes, worst_trajectory_cycle, DeterministicSwitched, Dim1Model,
    PlanarRotationModel, SwitchedLinearModel, WorstCycle,
};
pub use telegraph::{mode_of_velocity, velocity, TelegraphModel};

use thiserror::Error;

use crate::engine::{AffineField, FlowKind, HybridState, PdmpModel, RateProfile};
use crate::rng::RandomSource;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{model} {constraint}")]
    Constraint {
        model: &'static str,
        constraint: String,
    },
    #[error("unknown model variant `{0}`")]
    UnknownVariant(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing required key `{0}`")]
    MissingKey(String),
    #[error("invalid value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("segment is not invariant: {0}")]
    NotInvariant(String),
}

impl ModelError {
    pub(crate) fn constraint(model: &'static str, constraint: impl Into<String>) -> Self {
        ModelError::Constraint {
            model,
            constraint: constraint.into(),
        }
    }
}

/// Any model of the zoo, built from a [`ModelSpec`].
#[derive(Clone, Debug)]
pub enum Model {
    Storage(StorageModel),
    Bandit(BanditModel),
    Tcp(TcpModel),
    Aimd(AimdModel),
    SwitchedLinear(SwitchedLinearModel),
    Dim1(Dim1Model),
    PlanarRotation(PlanarRotationModel),
    Telegraph(TelegraphModel),
    MorrisLecar(MorrisLecarModel),
}

/// Validates `spec` and builds the corresponding model.
pub fn build_model(spec: &ModelSpec) -> Result<Model, ModelError> {
    spec.validate()?;
    Ok(match spec.clone() {
        ModelSpec::Storage { alpha, beta } => Model::Storage(StorageModel { alpha, beta }),
        ModelSpec::Bandit { p, q, g } => Model::Bandit(BanditModel { p, q, g }),
        ModelSpec::Tcp { lambda } => Model::Tcp(TcpModel { lambda }),
        ModelSpec::Aimd(spec) => Model::Aimd(AimdModel { spec }),
        ModelSpec::SwitchedLinear { alpha, r } => {
            Model::SwitchedLinear(SwitchedLinearModel { alpha, r })
        }
        ModelSpec::Dim1 {
            alpha0,
            alpha1,
            lambda0,
            lambda1,
        } => Model::Dim1(Dim1Model {
            alpha: [alpha0, alpha1],
            lambda: [lambda0, lambda1],
        }),
        ModelSpec::PlanarRotation { lambda0, lambda1 } => {
            Model::PlanarRotation(PlanarRotationModel {
                lambda: [lambda0, lambda1],
            })
        }
        ModelSpec::Telegraph { a, b } => Model::Telegraph(TelegraphModel { a, b }),
        ModelSpec::MorrisLecar(params) => Model::MorrisLecar(MorrisLecarModel { params }),
    })
}

macro_rules! dispatch {
    ($self:ident, $m:ident => $body:expr) => {
        match $self {
            Model::Storage($m) => $body,
            Model::Bandit($m) => $body,
            Model::Tcp($m) => $body,
            Model::Aimd($m) => $body,
            Model::SwitchedLinear($m) => $body,
            Model::Dim1($m) => $body,
            Model::PlanarRotation($m) => $body,
            Model::Telegraph($m) => $body,
            Model::MorrisLecar($m) => $body,
        }
    };
}

impl Model {
    pub fn tag(&self) -> &'static str {
        match self {
            Model::Storage(_) => "storage",
            Model::Bandit(_) => "bandit",
            Model::Tcp(_) => "tcp",
            Model::Aimd(_) => "aimd",
            Model::SwitchedLinear(_) => "switched-linear",
            Model::Dim1(_) => "dim1",
            Model::PlanarRotation(_) => "planar-rotation",
            Model::Telegraph(_) => "telegraph",
            Model::MorrisLecar(_) => "morris-lecar",
        }
    }
}

impl PdmpModel for Model {
    fn dim(&self) -> usize {
        dispatch!(self, m => m.dim())
    }

    fn mode_count(&self) -> usize {
        dispatch!(self, m => m.mode_count())
    }

    fn flow_kind(&self) -> FlowKind {
        dispatch!(self, m => m.flow_kind())
    }

    fn field(&self, mode: usize, x: &[f64], out: &mut [f64]) {
        dispatch!(self, m => m.field(mode, x, out))
    }

    fn closed_form_flow(&self, mode: usize, x: &[f64], dt: f64, out: &mut [f64]) -> bool {
        dispatch!(self, m => m.closed_form_flow(mode, x, dt, out))
    }

    fn affine_field(&self, mode: usize) -> Option<AffineField> {
        dispatch!(self, m => m.affine_field(mode))
    }

    fn rate(&self, state: &HybridState) -> f64 {
        dispatch!(self, m => m.rate(state))
    }

    fn rate_profile(&self, state: &HybridState) -> RateProfile {
        dispatch!(self, m => m.rate_profile(state))
    }

    fn segment_bound(&self, state: &HybridState, dt: f64) -> f64 {
        dispatch!(self, m => m.segment_bound(state, dt))
    }

    fn sample_jump(&self, pre: &HybridState, rng: &mut RandomSource) -> HybridState {
        dispatch!(self, m => m.sample_jump(pre, rng))
    }

    fn switch_rates(&self, state: &HybridState, out: &mut Vec<(usize, f64)>) -> bool {
        dispatch!(self, m => m.switch_rates(state, out))
    }

    fn contains(&self, state: &HybridState) -> bool {
        dispatch!(self, m => m.contains(state))
    }
}
