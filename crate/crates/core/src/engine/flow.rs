use nalgebra::DMatrix;

use super::{check_state, Coords, EngineError, FlowKind, HybridState, PdmpModel, Result};

/// Largest RK4 step used by the generic-ODE fallback.
const RK4_MAX_STEP: f64 = 1e-3;
const RK4_MAX_HALVINGS: u32 = 12;
const RK4_TOL: f64 = 1e-11;

/// Deterministic flow image of `state` after `dt`.
///
/// Fails with [`EngineError::Overflow`] when the image leaves the finite
/// region; `elapsed` then locates the first crossing of the explosion
/// threshold along the segment.
pub fn advance_flow<M: PdmpModel + ?Sized>(
    model: &M,
    state: &HybridState,
    dt: f64,
) -> Result<HybridState> {
    if dt.is_nan() || dt < 0.0 {
        return Err(EngineError::Contract(format!(
            "flow duration must be nonnegative, got {dt}"
        )));
    }
    check_state(model, state)?;
    if dt == 0.0 {
        return Ok(state.clone());
    }
    let out = raw_flow(model, state, dt)?;
    if out.exploded() {
        return Err(EngineError::Overflow {
            elapsed: explosion_time(model, state, dt)?,
        });
    }
    Ok(out)
}

fn raw_flow<M: PdmpModel + ?Sized>(model: &M, state: &HybridState, dt: f64) -> Result<HybridState> {
    let mut x = Coords::from_elem(0.0, model.dim());
    match model.flow_kind() {
        FlowKind::ClosedForm => {
            if !model.closed_form_flow(state.mode, &state.x, dt, &mut x) {
                return Err(EngineError::Contract(
                    "model declares a closed-form flow but provides none".into(),
                ));
            }
        }
        FlowKind::Affine => {
            let field = model.affine_field(state.mode).ok_or_else(|| {
                EngineError::Contract("model declares an affine flow but provides no field".into())
            })?;
            affine_flow(&field.matrix, &field.offset, &state.x, dt, &mut x);
        }
        FlowKind::GenericOde => {
            rk4_flow(|y, out| model.field(state.mode, y, out), &state.x, dt, &mut x);
        }
    }
    Ok(HybridState { x, mode: state.mode })
}

/// Bisects for the first time the flow crosses the explosion threshold.
fn explosion_time<M: PdmpModel + ?Sized>(model: &M, state: &HybridState, dt: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, dt);
    while hi - lo > 1e-9 * dt.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if raw_flow(model, state, mid)?.exploded() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Exact solution of `x' = M x + c` through the exponential of the augmented
/// matrix `[[M, c], [0, 0]]`.
fn affine_flow(matrix: &[f64], offset: &[f64], x0: &[f64], dt: f64, out: &mut [f64]) {
    let d = x0.len();
    let mut aug = DMatrix::<f64>::zeros(d + 1, d + 1);
    for r in 0..d {
        for c in 0..d {
            aug[(r, c)] = matrix[r * d + c] * dt;
        }
        aug[(r, d)] = offset[r] * dt;
    }
    let e = aug.exp();
    for r in 0..d {
        let mut acc = e[(r, d)];
        for c in 0..d {
            acc += e[(r, c)] * x0[c];
        }
        out[r] = acc;
    }
}

/// Fixed-step RK4 with steps of at most 1e-3, refined by step halving until
/// two successive resolutions agree; the final answer is Richardson
/// extrapolated.
pub fn rk4_flow(field: impl Fn(&[f64], &mut [f64]), x0: &[f64], dt: f64, out: &mut [f64]) {
    let mut steps = ((dt / RK4_MAX_STEP).ceil() as usize).max(1);
    let mut coarse = rk4_fixed(&field, x0, dt, steps);
    for _ in 0..RK4_MAX_HALVINGS {
        steps *= 2;
        let fine = rk4_fixed(&field, x0, dt, steps);
        let scale = fine.iter().map(|v| v.abs()).fold(1.0, f64::max);
        let diff = coarse
            .iter()
            .zip(&fine)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let done = diff <= RK4_TOL * scale;
        for (o, (f, c)) in out.iter_mut().zip(fine.iter().zip(&coarse)) {
            *o = f + (f - c) / 15.0;
        }
        if done || !diff.is_finite() {
            return;
        }
        coarse = fine;
    }
}

fn rk4_fixed(field: &impl Fn(&[f64], &mut [f64]), x0: &[f64], dt: f64, steps: usize) -> Vec<f64> {
    let d = x0.len();
    let h = dt / steps as f64;
    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    let mut tmp = vec![0.0; d];
    for _ in 0..steps {
        field(&x, &mut k1);
        for j in 0..d {
            tmp[j] = x[j] + 0.5 * h * k1[j];
        }
        field(&tmp, &mut k2);
        for j in 0..d {
            tmp[j] = x[j] + 0.5 * h * k2[j];
        }
        field(&tmp, &mut k3);
        for j in 0..d {
            tmp[j] = x[j] + h * k3[j];
        }
        field(&tmp, &mut k4);
        for j in 0..d {
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    x
}
