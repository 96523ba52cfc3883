//! Total-variation couplings of the storage and TCP processes started from two
//! points. Both follow the shared-noise coupling and then use one maximal
//! coupling step at the end.

use super::{CoupledRun, CouplingError, Result};
use crate::engine::HybridState;
use crate::rng::RandomSource;

/// Jump times of a rate-`rate` Poisson process on `(0, t]`.
fn poisson_times(rate: f64, t: f64, rng: &mut RandomSource) -> Vec<f64> {
    let mut times = Vec::new();
    let mut s = rng.exponential(rate);
    while s <= t {
        times.push(s);
        s += rng.exponential(rate);
    }
    times
}

/// Maximal coupling of `a + E` and `b + E'` with `E, E'` unit exponentials,
/// from one uniform `u`. The lower start draws its exponential by inversion.
/// If the result lands beyond the higher start (probability
/// `e^{-|a - b|}`), both take the same value. Otherwise the higher start
/// gets the reflected conditional quantile, which is again a fresh Exp(1)
/// above it. Returns `(a + E, b + E')`.
pub fn maximal_shifted_exponentials(a: f64, b: f64, u: f64) -> (f64, f64) {
    let (lo, hi, swapped) = if a <= b { (a, b, false) } else { (b, a, true) };
    let gap = hi - lo;
    let e = -u.ln();
    let low_value = lo + e;
    let high_value = if low_value >= hi {
        low_value
    } else {
        // e ∈ [0, gap): its conditional CDF value v is uniform; reflect it.
        let v = (-e).exp_m1() / (-gap).exp_m1();
        hi - (v).ln()
    };
    if swapped {
        (high_value, low_value)
    } else {
        (low_value, high_value)
    }
}

/// Maximal coupling of `T^X, T^Y ~ U(s, t)` aiming at `T^X = T^Y + shift`:
/// `T^X` is `T^Y + shift` rotated back into `(s, t)`. Returns `(T^X, aligned)`.
pub fn rotate_uniform(ty: f64, shift: f64, s: f64, t: f64) -> (f64, bool) {
    let len = t - s;
    let target = ty + shift;
    if target > s && target < t {
        (target, true)
    } else {
        (s + (target - s).rem_euclid(len), false)
    }
}

fn check_times(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(CouplingError::Contract(format!("horizon must be positive, got {t}")))
    }
}

/// Storage copies from `x` and `y` share the jump times and every increment
/// except the last, which is maximally coupled. Success has conditional
/// probability `exp(-|x - y| e^{-β T_{N_t}})`.
pub fn couple_tv_storage(x: f64, y: f64, t: f64, alpha: f64, beta: f64, rng: &mut RandomSource) -> Result<CoupledRun> {
    check_times(t)?;
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(CouplingError::Contract("storage requires alpha > 0 and beta > 0".into()));
    }
    let times = poisson_times(alpha, t, rng);
    let (mut a, mut b) = (x, y);
    let mut last = 0.0;
    let mut coalescence_time = None;
    for (k, &s) in times.iter().enumerate() {
        let decay = (-beta * (s - last)).exp();
        a *= decay;
        b *= decay;
        if k + 1 < times.len() {
            let e = rng.exp1();
            a += e;
            b += e;
        } else {
            let (na, nb) = maximal_shifted_exponentials(a, b, rng.uniform());
            a = na;
            b = nb;
            if a == b {
                coalescence_time = Some(s);
            }
        }
        last = s;
    }
    let decay = (-beta * (t - last)).exp();
    a *= decay;
    b *= decay;
    Ok(CoupledRun {
        first: HybridState::scalar(a, 0),
        second: HybridState::scalar(b, 0),
        coalesced: coalescence_time.is_some(),
        coalescence_time,
        distances: vec![(t, (a - b).abs())],
        jumps: [times.len(); 2],
    })
}

/// TCP copies from `x` and `y` share the first `N_t - 1` jump times. The last
/// jump times are uniform on `(T_{N_t-1}, t)` and are coupled so that
/// `T^X = T^Y + (x - y) 2^{-(N_t-1)}` whenever that fits in the interval.
/// Equal starts count as coalesced from time 0.
pub fn couple_tv_tcp(x: f64, y: f64, t: f64, lambda: f64, rng: &mut RandomSource) -> Result<CoupledRun> {
    check_times(t)?;
    if !(lambda > 0.0) {
        return Err(CouplingError::Contract("tcp requires lambda > 0".into()));
    }
    let times = poisson_times(lambda, t, rng);
    let n = times.len();
    let finish = |a: f64, b: f64, coalescence_time: Option<f64>| CoupledRun {
        first: HybridState::scalar(a, 0),
        second: HybridState::scalar(b, 0),
        coalesced: coalescence_time.is_some(),
        coalescence_time,
        distances: vec![(t, (a - b).abs())],
        jumps: [n; 2],
    };
    let equal_from_start = (x == y).then_some(0.0);
    if n == 0 {
        return Ok(finish(x + t, y + t, equal_from_start));
    }
    // Shared halvings up to the penultimate jump.
    let (mut a, mut b) = (x, y);
    let mut last = 0.0;
    for &s in &times[..n - 1] {
        a = (a + s - last) / 2.0;
        b = (b + s - last) / 2.0;
        last = s;
    }
    let ty = times[n - 1];
    let (tx, aligned) = rotate_uniform(ty, a - b, last, t);
    let xa = (a + tx - last) / 2.0 + (t - tx);
    let yb = (b + ty - last) / 2.0 + (t - ty);
    let coalescence_time = equal_from_start.or((aligned).then_some(tx.max(ty)));
    // After alignment the paths agree exactly; remove rounding noise.
    let yb = if aligned { xa } else { yb };
    Ok(finish(xa, yb, coalescence_time))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::ks_one_sample;

    #[test]
    fn maximal_coupling_marginals_and_success() {
        let (a, b) = (0.3, 1.1);
        let mut rng = RandomSource::new(8, 0);
        let n = 100_000;
        let (mut xs, mut ys, mut hits) = (Vec::new(), Vec::new(), 0);
        for _ in 0..n {
            let (p, q) = maximal_shifted_exponentials(a, b, rng.uniform());
            hits += usize::from(p == q);
            xs.push(p - a);
            ys.push(q - b);
        }
        let cdf = |z: f64| if z <= 0.0 { 0.0 } else { 1.0 - (-z).exp() };
        assert!(ks_one_sample(&xs, cdf).p_value > 0.001);
        assert!(ks_one_sample(&ys, cdf).p_value > 0.001);
        let p = hits as f64 / n as f64;
        let target = (a - b).exp();
        assert!((p - target).abs() < 4.0 * (target * (1.0 - target) / n as f64).sqrt());
    }

    #[test]
    fn rotation_keeps_uniform_marginal() {
        let mut rng = RandomSource::new(9, 0);
        let shifted: Vec<f64> = (0..50_000)
            .map(|_| rotate_uniform(1.0 + 2.0 * rng.uniform(), 0.7, 1.0, 3.0).0)
            .collect();
        assert!(ks_one_sample(&shifted, |z| ((z - 1.0) / 2.0).clamp(0.0, 1.0)).p_value > 0.001);
    }

    #[test]
    fn coalesced_storage_runs_end_equal() {
        let mut rng = RandomSource::new(1, 0);
        for _ in 0..2000 {
            let run = couple_tv_storage(3.0, 0.0, 4.0, 1.0, 2.0, &mut rng).unwrap();
            if run.coalesced {
                assert_eq!(run.first, run.second);
            }
        }
    }

    #[test]
    fn tcp_zero_jumps_never_coalesce_for_distinct_starts() {
        let mut rng = RandomSource::new(2, 0);
        for _ in 0..5000 {
            let run = couple_tv_tcp(2.0, 1.0, 1.0, 1.0, &mut rng).unwrap();
            if run.jumps[0] == 0 {
                assert!(!run.coalesced);
                assert_eq!(run.first.x[0], 3.0);
            }
            if run.coalesced {
                assert_eq!(run.first, run.second);
            }
        }
    }

    #[test]
    fn tcp_equal_starts_always_coalesce() {
        let mut rng = RandomSource::new(3, 0);
        for _ in 0..1000 {
            assert!(couple_tv_tcp(1.0, 1.0, 0.5, 1.0, &mut rng).unwrap().coalesced);
        }
    }
}
