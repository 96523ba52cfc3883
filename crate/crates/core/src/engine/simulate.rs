use super::{advance_flow, check_state, sample_next_jump, EngineError, HybridState, PdmpModel, Result};
use crate::rng::RandomSource;

/// One jump of a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub time: f64,
    pub pre: HybridState,
    pub post: HybridState,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Outcome {
    Completed,
    /// A coordinate crossed the explosion threshold at `time`.
    Exploded { time: f64 },
}

/// Event log of one run; together with the model's flow it determines the
/// path at every time in `[0, horizon]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub initial: HybridState,
    pub horizon: f64,
    pub events: Vec<Event>,
    /// State at the horizon, or the last post-jump state before an explosion.
    pub terminal: HybridState,
    pub outcome: Outcome,
}

impl Trajectory {
    /// `N_t`, the number of jumps in `(0, t]`.
    pub fn jumps_until(&self, t: f64) -> usize {
        self.events.partition_point(|e| e.time <= t)
    }

    /// Path value at time `t` (right-continuous at jump times).
    pub fn state_at<M: PdmpModel + ?Sized>(&self, model: &M, t: f64) -> Result<HybridState> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(EngineError::Contract(format!(
                "time {t} outside [0, {}]",
                self.horizon
            )));
        }
        let k = self.jumps_until(t);
        let (base, t0) = if k == 0 {
            (&self.initial, 0.0)
        } else {
            (&self.events[k - 1].post, self.events[k - 1].time)
        };
        advance_flow(model, base, t - t0)
    }

    /// Checks the event-log invariants: strictly increasing times in
    /// `(0, horizon]` and pre-jump states that continue the previous segment.
    pub fn check<M: PdmpModel + ?Sized>(&self, model: &M, tol: f64) -> std::result::Result<(), String> {
        let mut prev_time = 0.0;
        let mut prev_state = &self.initial;
        for (k, e) in self.events.iter().enumerate() {
            if !(e.time > prev_time && e.time <= self.horizon) {
                return Err(format!("event {k} at {} breaks time ordering", e.time));
            }
            let flowed = advance_flow(model, prev_state, e.time - prev_time)
                .map_err(|err| format!("event {k}: {err}"))?;
            let gap = flowed
                .x
                .iter()
                .zip(&e.pre.x)
                .map(|(a, b)| (a - b).abs() / (1.0 + a.abs()))
                .fold(0.0, f64::max);
            if gap > tol || flowed.mode != e.pre.mode {
                return Err(format!("event {k}: pre-jump state off the flow by {gap}"));
            }
            prev_time = e.time;
            prev_state = &e.post;
        }
        Ok(())
    }
}

/// Terminal data of a run driven by [`run`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub terminal: HybridState,
    pub outcome: Outcome,
    pub jumps: usize,
}

/// Runs the process to `horizon`, handing every event to `on_event` instead of
/// storing it.
pub fn run<M, F>(
    model: &M,
    init: &HybridState,
    horizon: f64,
    rng: &mut RandomSource,
    mut on_event: F,
) -> Result<RunSummary>
where
    M: PdmpModel + ?Sized,
    F: FnMut(&Event) -> Result<()>,
{
    if horizon.is_nan() || horizon <= 0.0 {
        return Err(EngineError::Contract(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    check_state(model, init)?;
    let mut time = 0.0;
    let mut current = init.clone();
    let mut jumps = 0;
    loop {
        let next = match sample_next_jump(model, &current, rng, horizon - time) {
            Ok(next) => next,
            Err(EngineError::Overflow { elapsed }) => {
                return Ok(RunSummary {
                    terminal: current,
                    outcome: Outcome::Exploded {
                        time: time + elapsed,
                    },
                    jumps,
                })
            }
            Err(e) => return Err(e),
        };
        match next {
            Some(jump) => {
                // Guard against a zero waiting time rounding onto the previous event.
                let t = (time + jump.dt).max(next_after(time));
                if t > horizon {
                    break;
                }
                time = t;
                jumps += 1;
                let event = Event {
                    time,
                    pre: jump.pre,
                    post: jump.post,
                };
                on_event(&event)?;
                current = event.post;
            }
            None => break,
        }
    }
    match advance_flow(model, &current, horizon - time) {
        Ok(terminal) => Ok(RunSummary {
            terminal,
            outcome: Outcome::Completed,
            jumps,
        }),
        Err(EngineError::Overflow { elapsed }) => Ok(RunSummary {
            terminal: current,
            outcome: Outcome::Exploded {
                time: time + elapsed,
            },
            jumps,
        }),
        Err(e) => Err(e),
    }
}

fn next_after(t: f64) -> f64 {
    if t == 0.0 {
        f64::MIN_POSITIVE
    } else {
        f64::from_bits(t.to_bits() + 1)
    }
}

/// Simulates one full trajectory on `[0, horizon]`.
pub fn simulate<M: PdmpModel + ?Sized>(
    model: &M,
    init: &HybridState,
    horizon: f64,
    rng: &mut RandomSource,
) -> Result<Trajectory> {
    let mut events = Vec::new();
    let summary = run(model, init, horizon, rng, |e| {
        events.push(e.clone());
        Ok(())
    })?;
    Ok(Trajectory {
        initial: init.clone(),
        horizon,
        events,
        terminal: summary.terminal,
        outcome: summary.outcome,
    })
}

/// Path values at the sorted `times`, using exactly the randomness that
/// [`simulate`] would consume up to the last time.
///
/// An explosion before the last requested time is reported as
/// [`EngineError::Overflow`] with `elapsed` measured from time 0.
pub fn sample_at<M: PdmpModel + ?Sized>(
    model: &M,
    init: &HybridState,
    times: &[f64],
    rng: &mut RandomSource,
) -> Result<Vec<HybridState>> {
    if times.is_empty() {
        return Ok(Vec::new());
    }
    if times.windows(2).any(|w| w[0] > w[1]) || times[0] < 0.0 {
        return Err(EngineError::Contract(
            "sample times must be sorted and nonnegative".into(),
        ));
    }
    let horizon = *times.last().unwrap();
    let mut out = Vec::with_capacity(times.len());
    if horizon == 0.0 {
        check_state(model, init)?;
        out.resize(times.len(), init.clone());
        return Ok(out);
    }
    let mut base = init.clone();
    let mut base_time = 0.0;
    let summary = run(model, init, horizon, rng, |e| {
        while out.len() < times.len() && times[out.len()] < e.time {
            out.push(advance_flow(model, &base, times[out.len()] - base_time)?);
        }
        base = e.post.clone();
        base_time = e.time;
        Ok(())
    })?;
    if let Outcome::Exploded { time } = summary.outcome {
        return Err(EngineError::Overflow { elapsed: time });
    }
    while out.len() < times.len() {
        out.push(advance_flow(model, &base, times[out.len()] - base_time)?);
    }
    Ok(out)
}
