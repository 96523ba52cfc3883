//! Lyapunov exponent of the randomly switched linear system by quadrature.
//!
//! The angle of `X_t` follows `θ' = -sin²θ` in mode 0 and `θ' = -cos²θ` in
//! mode 1, independently of `α`. On `(-π/2, 0)` its invariant densities are
//!
//! ```text
//! H(θ) = e^{-2r cot 2θ} ∫_θ^0 e^{2r cot 2y} sec²y dy
//! p_0 = C csc²θ · r H,    p_1 = C sec²θ · (1 - r H)
//! ```
//!
//! extended by `p_i(θ) = p_{1-i}(θ + π/2) = p_i(θ + π)`, and the exponent is
//! `L = G(r) - α` with `G = ∫_0^{2π} (p_0 - p_1) cos θ sin θ dθ`.
//!
//! Integrating by parts (`r sec²y = -φ'(y) sin²y` for `φ = 2r cot 2y`) gives
//! `r H = sin²θ - J(θ)` with
//!
//! ```text
//! J(θ) = ∫_θ^0 e^{φ(y) - φ(θ)} |sin 2y| dy,
//! ```
//!
//! whose integrand is bounded by 1. Then `p_0 = C (1 - csc²θ J)`,
//! `p_1 = C (1 + sec²θ J)`, `1/C = 4 (π + ∫ (sec² - csc²) J)` and
//! `G = 4 C ∫ J / |sin θ cos θ|`, all over `(-π/2, 0)`. Nothing here
//! overflows and `1 - rH` is never formed by subtraction.

use std::f64::consts::{FRAC_PI_2, PI};

use super::{domain, Result};
use crate::quadrature::Quadrature;

/// Endpoint clipping applied to every angular integral.
const CLIP: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovBreakdown {
    pub r: f64,
    pub alpha: f64,
    pub g_value: f64,
    /// `G - α`.
    pub l_value: f64,
    pub c_normalizer: f64,
    /// Error estimates of the two outer quadratures (`1/C`, then `G/C`).
    pub error_estimates: [f64; 2],
    inner: Quadrature,
}

/// `J(θ)` on `(-π/2, 0)`.
fn j_integral(theta: f64, r: f64, inner: &Quadrature) -> Result<f64> {
    let upper = -CLIP;
    if theta >= upper {
        return Ok(0.0);
    }
    let s2t = (2.0 * theta).sin();
    // φ(y) - φ(θ) = 2r (cot 2y - cot 2θ) = 2r sin(2θ - 2y) / (sin 2y sin 2θ)
    let integrand = |y: f64| {
        let s2y = (2.0 * y).sin();
        let exponent = 2.0 * r * (2.0 * (theta - y)).sin() / (s2y * s2t);
        exponent.exp() * s2y.abs()
    };
    Ok(inner.integrate(integrand, theta, upper)?.value)
}

fn inner_for(outer: &Quadrature) -> Quadrature {
    Quadrature {
        rel_tol: (outer.rel_tol * 1e-3).max(1e-13),
        abs_tol: 0.0,
        max_intervals: outer.max_intervals,
    }
}

/// [`lyapunov_quadrature_with`] at relative tolerance `1e-8`.
pub fn lyapunov_quadrature(alpha: f64, r: f64) -> Result<LyapunovBreakdown> {
    lyapunov_quadrature_with(alpha, r, &Quadrature::with_rel_tol(1e-8))
}

/// Computes `C(r)`, `G(r)` and `L(α, r)`; `outer` drives the integrals over
/// the angle, the inner `J` integrals run 1000 times tighter.
pub fn lyapunov_quadrature_with(alpha: f64, r: f64, outer: &Quadrature) -> Result<LyapunovBreakdown> {
    if !(alpha > 0.0 && alpha.is_finite()) || !(r > 0.0 && r.is_finite()) {
        return Err(domain(format!("requires alpha > 0 and r > 0, got ({alpha}, {r})")));
    }
    let inner = inner_for(outer);
    let (lo, hi) = (-FRAC_PI_2 + CLIP, -CLIP);
    // Inner failures surface as NaN in the outer integrand; report the first.
    let mut failure = None;
    let norm = outer.integrate(
        |x| match j_integral(x, r, &inner) {
            Ok(j) => {
                let (s, c) = x.sin_cos();
                (1.0 / (c * c) - 1.0 / (s * s)) * j
            }
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let norm = norm?;
    let c_normalizer = 1.0 / (4.0 * (PI + norm.value));
    let mut failure = None;
    let mut guarded = |x: f64| match j_integral(x, r, &inner) {
        Ok(j) => j / (x.sin() * x.cos()).abs(),
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let g_core = outer.integrate(&mut guarded, lo, hi);
    if let Some(e) = failure {
        return Err(e);
    }
    let g_core = g_core?;
    let g_value = 4.0 * c_normalizer * g_core.value;
    Ok(LyapunovBreakdown {
        r,
        alpha,
        g_value,
        l_value: g_value - alpha,
        c_normalizer,
        error_estimates: [norm.error, g_core.error],
        inner,
    })
}

impl LyapunovBreakdown {
    /// `H(θ; r)` for `θ ∈ (-π/2, 0)`.
    pub fn h_value(&self, theta: f64) -> Result<f64> {
        let theta = clip_quarter(theta)?;
        let s = theta.sin();
        Ok((s * s - j_integral(theta, self.r, &self.inner)?) / self.r)
    }

    /// Invariant density `p_mode(θ)` of the angle, any real `θ`.
    pub fn density(&self, mode: usize, theta: f64) -> Result<f64> {
        if mode > 1 || !theta.is_finite() {
            return Err(domain(format!("no density for mode {mode} at angle {theta}")));
        }
        // Reduce to [-π/2, π/2) by π-periodicity, then to (-π/2, 0) by the
        // quarter-turn mode swap.
        let mut phi = theta - PI * ((theta + FRAC_PI_2) / PI).floor();
        let mut mode = mode;
        if phi >= 0.0 {
            phi -= FRAC_PI_2;
            mode = 1 - mode;
        }
        let phi = phi.clamp(-FRAC_PI_2 + CLIP, -CLIP);
        let j = j_integral(phi, self.r, &self.inner)?;
        let (s, c) = phi.sin_cos();
        Ok(if mode == 0 {
            self.c_normalizer * (1.0 - j / (s * s))
        } else {
            self.c_normalizer * (1.0 + j / (c * c))
        })
    }

    /// `∫_0^{2π} (p_0 + p_1) dθ`, integrated quarter by quarter.
    pub fn angular_mass(&self) -> Result<f64> {
        let q = Quadrature::with_rel_tol(1e-10);
        let mut total = 0.0;
        for k in 0..4 {
            let (a, b) = (k as f64 * FRAC_PI_2, (k + 1) as f64 * FRAC_PI_2);
            let mut failure = None;
            let est = q.integrate(
                |t| match (self.density(0, t), self.density(1, t)) {
                    (Ok(p0), Ok(p1)) => p0 + p1,
                    (Err(e), _) | (_, Err(e)) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                },
                a,
                b,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            total += est?.value;
        }
        Ok(total)
    }

    /// Residuals of the stationary equations
    /// `∂(sin²θ p_0) + r (p_1 - p_0)` and `∂(cos²θ p_1) + r (p_0 - p_1)`
    /// at `θ`, derivatives by central differences of step `h`.
    pub fn stationary_residual(&self, theta: f64, h: f64) -> Result<[f64; 2]> {
        let f0 = |t: f64| -> Result<f64> { Ok(t.sin().powi(2) * self.density(0, t)?) };
        let f1 = |t: f64| -> Result<f64> { Ok(t.cos().powi(2) * self.density(1, t)?) };
        let d0 = (f0(theta + h)? - f0(theta - h)?) / (2.0 * h);
        let d1 = (f1(theta + h)? - f1(theta - h)?) / (2.0 * h);
        let (p0, p1) = (self.density(0, theta)?, self.density(1, theta)?);
        Ok([d0 + self.r * (p1 - p0), d1 + self.r * (p0 - p1)])
    }
}

fn clip_quarter(theta: f64) -> Result<f64> {
    if !(-FRAC_PI_2..=0.0).contains(&theta) {
        return Err(domain(format!("angle {theta} outside [-pi/2, 0]")));
    }
    Ok(theta.clamp(-FRAC_PI_2 + CLIP, -CLIP))
}

/// `(r, G(r))` on the given grid.
pub fn g_curve(grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    grid.iter()
        .map(|&r| Ok((r, lyapunov_quadrature(1.0, r)?.g_value)))
        .collect()
}

/// Golden-section search for the maximizer of `G` on `[lo, hi]`, stopping when
/// the bracket is narrower than `tol`. Returns `(r, G(r))`.
pub fn g_argmax(lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    if !(lo > 0.0 && lo < hi && tol > 0.0) {
        return Err(domain(format!("invalid search bracket [{lo}, {hi}]")));
    }
    let g = |r: f64| -> Result<f64> { Ok(lyapunov_quadrature(1.0, r)?.g_value) };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c)?, g(d)?);
    while b - a > tol {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d)?;
        }
    }
    let r = 0.5 * (a + b);
    Ok((r, g(r)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `H` straight from its defining integral, usable where the exponentials
    /// stay in range.
    fn h_direct(theta: f64, r: f64) -> f64 {
        let q = Quadrature::with_rel_tol(1e-12);
        let cot2 = |y: f64| 1.0 / (2.0 * y).tan();
        let inner = q
            .integrate(|y| (2.0 * r * cot2(y)).exp() / y.cos().powi(2), theta, -1e-10)
            .unwrap()
            .value;
        (-2.0 * r * cot2(theta)).exp() * inner
    }

    #[test]
    fn stable_form_matches_defining_integral() {
        let b = lyapunov_quadrature(1.0, 1.0).unwrap();
        for theta in [-1.2, -0.9, -0.6, -0.3] {
            let direct = h_direct(theta, 1.0);
            let stable = b.h_value(theta).unwrap();
            assert!((direct - stable).abs() < 1e-9 * direct.abs().max(1e-3), "{theta}: {direct} vs {stable}");
        }
    }

    #[test]
    fn normalizer_matches_defining_integral() {
        // 1/C = 4 ∫ sec² + (csc² - sec²) r H, on a domain where H_direct is safe.
        let r = 0.5;
        let b = lyapunov_quadrature(1.0, r).unwrap();
        let q = Quadrature::with_rel_tol(1e-9);
        let integrand = |x: f64| {
            let rh = r * b.h_value(x).unwrap();
            let (s, c) = x.sin_cos();
            1.0 / (c * c) * (1.0 - rh) + rh / (s * s)
        };
        let total = q.integrate(integrand, -FRAC_PI_2 + 1e-10, -1e-10).unwrap().value;
        assert!((4.0 * total * b.c_normalizer - 1.0).abs() < 1e-6);
    }

    #[test]
    fn densities_are_nonnegative_and_continuous() {
        let b = lyapunov_quadrature(1.0, 4.6).unwrap();
        for k in 1..200 {
            let t = -FRAC_PI_2 * k as f64 / 200.0;
            assert!(b.density(0, t).unwrap() >= 0.0);
            assert!(b.density(1, t).unwrap() >= 0.0);
        }
        // Both densities meet C at the quarter boundaries.
        for t in [0.0, -FRAC_PI_2, PI] {
            for mode in 0..2 {
                let p = b.density(mode, t).unwrap();
                assert!((p - b.c_normalizer).abs() < 1e-6, "mode {mode} at {t}: {p}");
            }
        }
    }

    #[test]
    fn extension_symmetries() {
        let b = lyapunov_quadrature(1.0, 2.0).unwrap();
        for t in [-1.3, -0.7, -0.1] {
            let p0 = b.density(0, t).unwrap();
            assert!((p0 - b.density(1, t + FRAC_PI_2).unwrap()).abs() < 1e-14);
            assert!((p0 - b.density(0, t + PI).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn mass_is_one() {
        for r in [0.5, 1.0, 5.0, 20.0] {
            let m = lyapunov_quadrature(1.0, r).unwrap().angular_mass().unwrap();
            assert!((m - 1.0).abs() < 1e-6, "r = {r}: mass {m}");
        }
    }

    #[test]
    fn g_positive() {
        for r in [0.5, 1.0, 4.6, 20.0] {
            assert!(lyapunov_quadrature(0.3, r).unwrap().g_value > 0.0);
        }
    }

    #[test]
    fn l_is_g_minus_alpha() {
        let b = lyapunov_quadrature(0.37, 3.0).unwrap();
        assert_eq!(b.l_value, b.g_value - 0.37);
    }

    #[test]
    fn stationary_equations_hold() {
        for r in [1.0, 4.6] {
            let b = lyapunov_quadrature(1.0, r).unwrap();
            for k in 1..20 {
                let t = -FRAC_PI_2 * k as f64 / 20.0;
                let [e0, e1] = b.stationary_residual(t, 1e-4).unwrap();
                assert!(e0.abs() < 1e-5 && e1.abs() < 1e-5, "r {r} θ {t}: {e0} {e1}");
            }
        }
    }

    #[test]
    fn refinement_is_self_consistent() {
        for r in [0.1, 1.0, 4.6, 50.0] {
            let coarse = lyapunov_quadrature(1.0, r).unwrap().g_value;
            let fine = Quadrature {
                rel_tol: 1e-10,
                abs_tol: 1e-16,
                max_intervals: 8000,
            };
            let fine = lyapunov_quadrature_with(1.0, r, &fine).unwrap().g_value;
            assert!((coarse - fine).abs() < 1e-7, "r {r}: {coarse} vs {fine}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(lyapunov_quadrature(0.0, 1.0).is_err());
        assert!(lyapunov_quadrature(1.0, -1.0).is_err());
    }
}
