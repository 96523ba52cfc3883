//! Couplings that run two copies on one dominating Poisson clock.
//!
//! Candidate times come from a clock whose rate bounds both copies' rates
//! over a lookahead window. A single uniform `u` per candidate decides for
//! both copies: copy `k` jumps when `u·B` falls below its rate, so copies with
//! equal rates jump together. Each copy, viewed alone, is an exact thinning
//! of its own jump process.

use super::{state_distance, CoupledRun, CouplingError, Result};
use crate::engine::{advance_flow, EngineError, HybridState, PdmpModel};
use crate::models::Model;
use crate::rng::RandomSource;

const BOUND_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, PartialEq)]
enum Sharing {
    /// Jump variables shared through a cloned random stream.
    Kernel,
    /// Mode switches chosen from stacked rate intervals.
    Modes,
}

struct Pair<'a, M: PdmpModel + ?Sized> {
    model: &'a M,
    states: [HybridState; 2],
    time: f64,
    times: &'a [f64],
    distances: Vec<(f64, f64)>,
    coalescence_time: Option<f64>,
    jumps: [usize; 2],
}

impl<M: PdmpModel + ?Sized> Pair<'_, M> {
    /// Moves both copies `dt` along their flows, recording requested samples.
    fn advance(&mut self, dt: f64) -> Result<()> {
        let end = self.time + dt;
        while let Some(&s) = self.times.get(self.distances.len()) {
            if s > end {
                break;
            }
            let a = advance_flow(self.model, &self.states[0], s - self.time)?;
            let b = advance_flow(self.model, &self.states[1], s - self.time)?;
            self.distances.push((s, state_distance(&a, &b)));
        }
        for k in 0..2 {
            self.states[k] = advance_flow(self.model, &self.states[k], dt)?;
        }
        self.time = end;
        Ok(())
    }

    fn note_coalescence(&mut self) {
        if self.coalescence_time.is_none() && self.states[0] == self.states[1] {
            self.coalescence_time = Some(self.time);
        }
    }
}

fn stacked_target(rates: &[(usize, f64)], level: f64) -> Option<usize> {
    let mut sorted = rates.to_vec();
    sorted.sort_by_key(|r| r.0);
    let mut acc = 0.0;
    for (target, rate) in sorted {
        acc += rate.max(0.0);
        if level < acc {
            return Some(target);
        }
    }
    None
}

fn drive<M: PdmpModel + ?Sized>(
    model: &M,
    x: &HybridState,
    y: &HybridState,
    t: f64,
    times: &[f64],
    rng: &mut RandomSource,
    sharing: Sharing,
) -> Result<CoupledRun> {
    if !(t >= 0.0) {
        return Err(CouplingError::Contract(format!("horizon must be >= 0, got {t}")));
    }
    if times.windows(2).any(|w| w[0] > w[1]) || times.iter().any(|&s| !(0.0..=t).contains(&s)) {
        return Err(CouplingError::Contract("sample times must be sorted within [0, t]".into()));
    }
    let mut pair = Pair {
        model,
        states: [x.clone(), y.clone()],
        time: 0.0,
        times,
        distances: Vec::with_capacity(times.len()),
        coalescence_time: None,
        jumps: [0, 0],
    };
    pair.note_coalescence();
    let mut rates = [Vec::new(), Vec::new()];
    while pair.time < t {
        let remaining = t - pair.time;
        let instant = model.rate(&pair.states[0]).max(model.rate(&pair.states[1]));
        let window = if instant > 0.0 {
            remaining.min(1.0 / instant)
        } else {
            remaining
        };
        let bound = model
            .segment_bound(&pair.states[0], window)
            .max(model.segment_bound(&pair.states[1], window));
        if !(bound >= 0.0) || !bound.is_finite() {
            return Err(EngineError::InvalidBound(bound).into());
        }
        let wait = if bound > 0.0 {
            rng.exponential(bound)
        } else {
            f64::INFINITY
        };
        if wait > window {
            pair.advance(window)?;
            continue;
        }
        pair.advance(wait)?;
        let level = rng.uniform() * bound;
        let mut posts: [Option<HybridState>; 2] = [None, None];
        match sharing {
            Sharing::Kernel => {
                let shared = rng.clone();
                for k in 0..2 {
                    let rate = model.rate(&pair.states[k]);
                    if rate > bound * (1.0 + BOUND_SLACK) {
                        return Err(EngineError::BoundViolation { bound, rate }.into());
                    }
                    if level < rate {
                        let mut stream = shared.clone();
                        posts[k] = Some(model.sample_jump(&pair.states[k], &mut stream));
                        *rng = stream;
                    }
                }
            }
            Sharing::Modes => {
                for k in 0..2 {
                    model.switch_rates(&pair.states[k], &mut rates[k]);
                    let rate: f64 = rates[k].iter().map(|r| r.1).sum();
                    if rate > bound * (1.0 + BOUND_SLACK) {
                        return Err(EngineError::BoundViolation { bound, rate }.into());
                    }
                    if let Some(target) = stacked_target(&rates[k], level) {
                        posts[k] = Some(HybridState {
                            x: pair.states[k].x.clone(),
                            mode: target,
                        });
                    }
                }
            }
        }
        for (k, post) in posts.into_iter().enumerate() {
            if let Some(post) = post {
                pair.states[k] = post;
                pair.jumps[k] += 1;
            }
        }
        pair.note_coalescence();
    }
    // Samples requested exactly at the horizon.
    pair.advance(0.0)?;
    Ok(CoupledRun {
        coalesced: pair.coalescence_time.is_some(),
        coalescence_time: pair.coalescence_time,
        first: pair.states[0].clone(),
        second: pair.states[1].clone(),
        distances: pair.distances,
        jumps: pair.jumps,
    })
}

/// Drives two copies of a storage, TCP or AIMD model from `x` and `y` with
/// the same jump clock and the same jump variables, recording `|X_s - Y_s|`
/// at the sorted `times`.
pub fn couple_shared_noise(
    model: &Model,
    x: f64,
    y: f64,
    t: f64,
    times: &[f64],
    rng: &mut RandomSource,
) -> Result<CoupledRun> {
    match model {
        Model::Storage(_) | Model::Tcp(_) | Model::Aimd(_) => drive(
            model,
            &HybridState::scalar(x, 0),
            &HybridState::scalar(y, 0),
            t,
            times,
            rng,
            Sharing::Kernel,
        ),
        other => Err(CouplingError::Unsupported {
            coupling: "shared-noise",
            model: other.tag(),
        }),
    }
}

/// Basic coupling of two copies of a switched-flow model (dim1, planar
/// rotation, Morris–Lecar). Mode switches are read off stacked rate
/// intervals with a shared uniform, so the mode processes coincide whenever
/// the rates do. Records `|X - X̃| + 1{I ≠ Ĩ}` at the sorted `times`.
pub fn couple_switched(
    model: &Model,
    x: &HybridState,
    y: &HybridState,
    t: f64,
    times: &[f64],
    rng: &mut RandomSource,
) -> Result<CoupledRun> {
    match model {
        Model::Dim1(_) | Model::PlanarRotation(_) | Model::MorrisLecar(_) => {
            drive(model, x, y, t, times, rng, Sharing::Modes)
        }
        other => Err(CouplingError::Unsupported {
            coupling: "switched",
            model: other.tag(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_model, ModelSpec};

    #[test]
    fn storage_distance_is_deterministic() {
        let m = build_model(&ModelSpec::Storage { alpha: 1.0, beta: 0.5 }).unwrap();
        let times = [0.5, 1.0, 3.0];
        for seed in 0..20 {
            let run = couple_shared_noise(&m, 4.0, 1.0, 3.0, &times, &mut RandomSource::new(seed, 0)).unwrap();
            for &(s, d) in &run.distances {
                let expected = 3.0 * (-0.5 * s).exp();
                assert!((d - expected).abs() < 1e-12, "{d} vs {expected}");
            }
            assert_eq!(run.jumps[0], run.jumps[1]);
        }
    }

    #[test]
    fn tcp_distance_halves_per_jump() {
        let m = build_model(&ModelSpec::Tcp { lambda: 1.0 }).unwrap();
        for seed in 0..50 {
            let run = couple_shared_noise(&m, 2.0, 1.0, 5.0, &[5.0], &mut RandomSource::new(seed, 3)).unwrap();
            let d = run.distances[0].1;
            let expected = 0.5f64.powi(run.jumps[0] as i32);
            assert!((d - expected).abs() <= 1e-12 * expected.max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn equal_starts_stay_equal() {
        let m = build_model(&ModelSpec::Tcp { lambda: 2.0 }).unwrap();
        let run = couple_shared_noise(&m, 1.5, 1.5, 4.0, &[1.0, 4.0], &mut RandomSource::new(1, 1)).unwrap();
        assert!(run.distances.iter().all(|&(_, d)| d == 0.0));
        assert!(run.coalesced);
    }

    #[test]
    fn unsupported_models_are_rejected() {
        let m = build_model(&ModelSpec::Telegraph { a: 1.0, b: 2.0 }).unwrap();
        assert!(couple_shared_noise(&m, 0.0, 1.0, 1.0, &[], &mut RandomSource::new(0, 0)).is_err());
        let s = build_model(&ModelSpec::Storage { alpha: 1.0, beta: 1.0 }).unwrap();
        let z = HybridState::scalar(0.0, 0);
        assert!(couple_switched(&s, &z, &z, 1.0, &[], &mut RandomSource::new(0, 0)).is_err());
    }

    #[test]
    fn dim1_shared_modes_contract() {
        let spec = ModelSpec::Dim1 {
            alpha0: 1.0,
            alpha1: 3.0,
            lambda0: 2.0,
            lambda1: 2.0,
        };
        let m = build_model(&spec).unwrap();
        let (x, y) = (HybridState::scalar(0.2, 0), HybridState::scalar(0.9, 0));
        let times: Vec<f64> = (1..=10).map(|k| k as f64 * 0.5).collect();
        for seed in 0..20 {
            let run = couple_switched(&m, &x, &y, 5.0, &times, &mut RandomSource::new(seed, 0)).unwrap();
            for &(s, d) in &run.distances {
                assert!(d <= 0.7 * (-s).exp() * (1.0 + 1e-12), "{s}: {d}");
            }
        }
    }

    #[test]
    fn rotation_contracts_at_unit_rate() {
        let m = build_model(&ModelSpec::PlanarRotation { lambda0: 1.0, lambda1: 2.0 }).unwrap();
        let x = HybridState::new(&[1.0, 0.5], 1);
        let y = HybridState::new(&[-0.5, 2.0], 1);
        let d0 = (1.5f64.powi(2) + 1.5f64.powi(2)).sqrt();
        let run = couple_switched(&m, &x, &y, 3.0, &[1.0, 2.0, 3.0], &mut RandomSource::new(4, 0)).unwrap();
        for &(s, d) in &run.distances {
            assert!((d - d0 * (-s).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_starts_give_zero_distance() {
        let m = build_model(&ModelSpec::MorrisLecar(crate::models::MorrisLecarParams::reference())).unwrap();
        let x = HybridState::scalar(30.0, 12);
        let run = couple_switched(&m, &x, &x, 20.0, &[5.0, 20.0], &mut RandomSource::new(2, 0)).unwrap();
        assert!(run.distances.iter().all(|&(_, d)| d == 0.0));
        assert_eq!(run.coalescence_time, Some(0.0));
    }
}
