use std::fmt;
use std::sync::Arc;

use crate::engine::{AffineField, FlowKind, HybridState, PdmpModel};
use crate::rng::RandomSource;

type FieldFn = Arc<dyn Fn(usize, &[f64], &mut [f64]) + Send + Sync>;
type StateRateFn = Arc<dyn Fn(&HybridState) -> f64 + Send + Sync>;
type SegmentBoundFn = Arc<dyn Fn(&HybridState, f64) -> f64 + Send + Sync>;
type KernelFn = Arc<dyn Fn(&HybridState, &mut RandomSource) -> HybridState + Send + Sync>;

/// A user-supplied model. Its flow is either affine (solved exactly) or a
/// generic vector field (integrated by RK4); jumps are always thinned.
#[derive(Clone)]
pub struct CustomModel {
    dim: usize,
    modes: usize,
    kind: FlowKind,
    field: FieldFn,
    affine: Vec<AffineField>,
    rate: StateRateFn,
    bound: SegmentBoundFn,
    kernel: KernelFn,
}

impl fmt::Debug for CustomModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomModel")
            .field("dim", &self.dim)
            .field("modes", &self.modes)
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

impl CustomModel {
    pub fn generic(
        dim: usize,
        modes: usize,
        field: impl Fn(usize, &[f64], &mut [f64]) + Send + Sync + 'static,
        rate: impl Fn(&HybridState) -> f64 + Send + Sync + 'static,
        bound: impl Fn(&HybridState, f64) -> f64 + Send + Sync + 'static,
        kernel: impl Fn(&HybridState, &mut RandomSource) -> HybridState + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            modes,
            kind: FlowKind::GenericOde,
            field: Arc::new(field),
            affine: Vec::new(),
            rate: Arc::new(rate),
            bound: Arc::new(bound),
            kernel: Arc::new(kernel),
        }
    }

    /// One affine field per mode.
    pub fn affine(
        fields: Vec<AffineField>,
        rate: impl Fn(&HybridState) -> f64 + Send + Sync + 'static,
        bound: impl Fn(&HybridState, f64) -> f64 + Send + Sync + 'static,
        kernel: impl Fn(&HybridState, &mut RandomSource) -> HybridState + Send + Sync + 'static,
    ) -> Self {
        let dim = fields.first().map_or(0, |f| f.offset.len());
        let coeffs = fields.clone();
        Self {
            dim,
            modes: fields.len(),
            kind: FlowKind::Affine,
            field: Arc::new(move |mode, x, out| {
                let f = &coeffs[mode];
                let d = x.len();
                for r in 0..d {
                    out[r] = f.offset[r] + (0..d).map(|c| f.matrix[r * d + c] * x[c]).sum::<f64>();
                }
            }),
            affine: fields,
            rate: Arc::new(rate),
            bound: Arc::new(bound),
            kernel: Arc::new(kernel),
        }
    }
}

impl PdmpModel for CustomModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn mode_count(&self) -> usize {
        self.modes
    }

    fn flow_kind(&self) -> FlowKind {
        self.kind
    }

    fn field(&self, mode: usize, x: &[f64], out: &mut [f64]) {
        (self.field)(mode, x, out)
    }

    fn affine_field(&self, mode: usize) -> Option<AffineField> {
        self.affine.get(mode).cloned()
    }

    fn rate(&self, state: &HybridState) -> f64 {
        (self.rate)(state)
    }

    fn segment_bound(&self, state: &HybridState, dt: f64) -> f64 {
        (self.bound)(state, dt)
    }

    fn sample_jump(&self, pre: &HybridState, rng: &mut RandomSource) -> HybridState {
        (self.kernel)(pre, rng)
    }
}
