use super::{advance_flow, check_state, EngineError, HybridState, PdmpModel, RateProfile, Result};
use crate::rng::RandomSource;

/// Relative slack allowed between a segment bound and the observed rate.
const BOUND_SLACK: f64 = 1e-12;

/// First jump after the current state.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpEvent {
    /// Waiting time from the starting state.
    pub dt: f64,
    /// State reached along the flow just before the jump.
    pub pre: HybridState,
    /// Kernel draw at `pre`.
    pub post: HybridState,
}

/// Draws the first jump within `max_dt`, or `None` when the process does not
/// jump before `max_dt`.
///
/// The waiting time has survival function `exp(-∫_0^t rate(φ_s(x)) ds)`
/// whichever sampling route the model's [`RateProfile`] selects.
pub fn sample_next_jump<M: PdmpModel + ?Sized>(
    model: &M,
    state: &HybridState,
    rng: &mut RandomSource,
    max_dt: f64,
) -> Result<Option<JumpEvent>> {
    if max_dt.is_nan() || max_dt <= 0.0 {
        return Err(EngineError::Contract(format!(
            "max_dt must be positive, got {max_dt}"
        )));
    }
    check_state(model, state)?;
    match model.rate_profile(state) {
        RateProfile::Constant(rate) => {
            if rate <= 0.0 {
                return Ok(None);
            }
            let dt = rng.exponential(rate);
            finish(model, state, dt, max_dt, rng)
        }
        RateProfile::Piecewise { pieces, tail } => {
            let mut hazard = rng.exp1();
            let mut elapsed = 0.0;
            for &(rate, duration) in &pieces {
                if rate > 0.0 && rate * duration >= hazard {
                    return finish(model, state, elapsed + hazard / rate, max_dt, rng);
                }
                hazard -= rate.max(0.0) * duration;
                elapsed += duration;
                if elapsed > max_dt {
                    return Ok(None);
                }
            }
            if tail <= 0.0 {
                return Ok(None);
            }
            finish(model, state, elapsed + hazard / tail, max_dt, rng)
        }
        RateProfile::Bounded => thin(model, state, rng, max_dt),
    }
}

fn finish<M: PdmpModel + ?Sized>(
    model: &M,
    state: &HybridState,
    dt: f64,
    max_dt: f64,
    rng: &mut RandomSource,
) -> Result<Option<JumpEvent>> {
    if dt > max_dt {
        return Ok(None);
    }
    let pre = advance_flow(model, state, dt)?;
    let post = model.sample_jump(&pre, rng);
    Ok(Some(JumpEvent { dt, pre, post }))
}

/// Thinning on lookahead windows of length `1 / bound`, so each window costs
/// O(1) proposals.
fn thin<M: PdmpModel + ?Sized>(
    model: &M,
    state: &HybridState,
    rng: &mut RandomSource,
    max_dt: f64,
) -> Result<Option<JumpEvent>> {
    let mut elapsed = 0.0;
    let mut current = state.clone();
    loop {
        let remaining = max_dt - elapsed;
        if remaining <= 0.0 {
            return Ok(None);
        }
        let coarse = model.segment_bound(&current, remaining);
        let window = if coarse.is_finite() && coarse > 0.0 {
            remaining.min(1.0 / coarse)
        } else {
            remaining.min(1.0)
        };
        let bound = model.segment_bound(&current, window);
        if !bound.is_finite() || bound < 0.0 {
            return Err(EngineError::InvalidBound(bound));
        }
        let proposal = if bound > 0.0 {
            rng.exponential(bound)
        } else {
            f64::INFINITY
        };
        if proposal > window {
            current = advance(model, &current, window, elapsed)?;
            elapsed += window;
            continue;
        }
        current = advance(model, &current, proposal, elapsed)?;
        elapsed += proposal;
        let rate = model.rate(&current);
        if rate > bound * (1.0 + BOUND_SLACK) {
            return Err(EngineError::BoundViolation { bound, rate });
        }
        if rng.uniform() * bound < rate {
            let post = model.sample_jump(&current, rng);
            return Ok(Some(JumpEvent {
                dt: elapsed,
                pre: current,
                post,
            }));
        }
    }
}

fn advance<M: PdmpModel + ?Sized>(
    model: &M,
    state: &HybridState,
    dt: f64,
    offset: f64,
) -> Result<HybridState> {
    advance_flow(model, state, dt).map_err(|e| match e {
        EngineError::Overflow { elapsed } => EngineError::Overflow {
            elapsed: elapsed + offset,
        },
        other => other,
    })
}

/// Inverts the discrete CDF of `(index, weight)` pairs taken in ascending
/// index order. `u` is a uniform on (0, 1).
pub fn pick_by_cdf(weights: &[(usize, f64)], u: f64) -> usize {
    let mut sorted: smallvec::SmallVec<[(usize, f64); 8]> = weights.iter().copied().collect();
    sorted.sort_by_key(|w| w.0);
    let total: f64 = sorted.iter().map(|w| w.1.max(0.0)).sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last = sorted[0].0;
    for &(idx, w) in &sorted {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = idx;
        if target < acc {
            return idx;
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_pick_respects_index_order() {
        let w = [(3, 1.0), (1, 1.0), (2, 2.0)];
        assert_eq!(pick_by_cdf(&w, 0.1), 1);
        assert_eq!(pick_by_cdf(&w, 0.3), 2);
        assert_eq!(pick_by_cdf(&w, 0.74), 2);
        assert_eq!(pick_by_cdf(&w, 0.76), 3);
    }

    #[test]
    fn cdf_pick_skips_zero_weights() {
        let w = [(0, 0.0), (1, 1.0), (2, 0.0)];
        for u in [0.01, 0.5, 0.99] {
            assert_eq!(pick_by_cdf(&w, u), 1);
        }
    }
}
