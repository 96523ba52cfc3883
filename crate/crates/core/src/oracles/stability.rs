use std::fmt;

use super::{domain, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabilityClass {
    Stable,
    Marginal,
    Unstable,
    /// `2α > 1`: the two matrices share a quadratic Lyapunov function.
    CommonLyapunov,
}

impl StabilityClass {
    pub fn as_str(self) -> &'static str {
        match self {
            StabilityClass::Stable => "stable",
            StabilityClass::Marginal => "marginal",
            StabilityClass::Unstable => "unstable",
            StabilityClass::CommonLyapunov => "common-lyapunov",
        }
    }
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityReport {
    pub alpha: f64,
    /// `R(α²)`.
    pub r_value: f64,
    pub class: StabilityClass,
}

/// `R(α²) = (1 + 2α² + √(1+4α²)) / (2α²) · e^{-2√(1+4α²)}`: the growth factor
/// of the worst trajectory of the deterministic switched system over one
/// half-turn.
pub fn stability_r(alpha: f64) -> Result<StabilityReport> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(domain(format!("requires alpha > 0, got {alpha}")));
    }
    let a2 = alpha * alpha;
    let s = (1.0 + 4.0 * a2).sqrt();
    let r_value = (1.0 + 2.0 * a2 + s) / (2.0 * a2) * (-2.0 * s).exp();
    let class = if 2.0 * alpha > 1.0 {
        StabilityClass::CommonLyapunov
    } else if (r_value - 1.0).abs() <= 1e-12 {
        StabilityClass::Marginal
    } else if r_value > 1.0 {
        StabilityClass::Unstable
    } else {
        StabilityClass::Stable
    };
    Ok(StabilityReport {
        alpha,
        r_value,
        class,
    })
}

/// Root of `R(α²) = 1` by bisection on `[lo, hi]` to width `tol`.
pub fn stability_root(lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let f = |a: f64| -> Result<f64> { Ok(stability_r(a)?.r_value - 1.0) };
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a)?, f(b)?);
    if fa.signum() == fb.signum() {
        return Err(domain(format!("R - 1 does not change sign on [{lo}, {hi}]")));
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        if f(m)?.signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::worst_trajectory_cycle;

    #[test]
    fn value_at_one_half() {
        let rep = stability_r(0.5).unwrap();
        // (1.5 + √2)/0.5 · e^{-2√2}
        let expected = (1.5 + 2f64.sqrt()) / 0.5 * (-2.0 * 2f64.sqrt()).exp();
        assert!((rep.r_value - expected).abs() < 1e-15);
        assert!((rep.r_value - 0.3445).abs() < 1e-4);
        assert_eq!(rep.class, StabilityClass::Stable);
    }

    #[test]
    fn root_location() {
        let root = stability_root(0.01, 0.5, 1e-6).unwrap();
        assert!((root - 0.3314).abs() < 1e-3, "{root}");
    }

    #[test]
    fn small_alpha_is_unstable() {
        let rep = stability_r(0.01).unwrap();
        assert!(rep.r_value > 1.0);
        assert_eq!(rep.class, StabilityClass::Unstable);
        // R ~ e^{-2}/α² as α → 0
        assert!((rep.r_value * 1e-4 / (-2f64).exp() - 1.0).abs() < 0.01);
    }

    #[test]
    fn large_alpha_has_common_lyapunov_function() {
        assert_eq!(stability_r(0.75).unwrap().class, StabilityClass::CommonLyapunov);
    }

    #[test]
    fn matches_worst_trajectory_growth() {
        for k in 1..50 {
            let alpha = k as f64 / 50.0;
            let g = worst_trajectory_cycle(alpha).unwrap().growth;
            let r = stability_r(alpha).unwrap().r_value;
            assert!((g - r).abs() < 1e-10 * r.max(1.0));
        }
    }
}
