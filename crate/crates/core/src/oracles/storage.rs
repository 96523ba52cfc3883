use super::{domain, Result};

/// Laplace transform `E[e^{s X_t}]` of the storage process from an initial
/// law with transform `l0`:
/// `l0(s e^{-βt}) ((1 - s e^{-βt}) / (1 - s))^{α/β}`.
pub fn storage_laplace(t: f64, s: f64, l0: impl Fn(f64) -> f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(s < 1.0) {
        return Err(domain(format!("Laplace argument must be < 1, got {s}")));
    }
    if !(t >= 0.0) || !(alpha > 0.0) || !(beta > 0.0) {
        return Err(domain("requires t >= 0, alpha > 0, beta > 0"));
    }
    let shrunk = s * (-beta * t).exp();
    Ok(l0(shrunk) * ((1.0 - shrunk) / (1.0 - s)).powf(alpha / beta))
}

/// `E_x(X_t) = α/β + (x - α/β) e^{-βt}`.
pub fn storage_mean(x: f64, t: f64, alpha: f64, beta: f64) -> f64 {
    let rest = alpha / beta;
    rest + (x - rest) * (-beta * t).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplace_at_time_zero_is_initial() {
        let l0 = |s: f64| (2.0 * s).exp();
        let v = storage_laplace(0.0, 0.3, l0, 1.0, 2.0).unwrap();
        assert!((v - l0(0.3)).abs() < 1e-15);
    }

    #[test]
    fn laplace_tends_to_gamma() {
        let v = storage_laplace(100.0, 0.5, |_| 1.0, 1.0, 1.0).unwrap();
        assert!((v - 2.0).abs() < 1e-6);
    }

    #[test]
    fn laplace_rejects_s_at_least_one() {
        assert!(storage_laplace(1.0, 1.0, |_| 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn mean_fixed_point_and_value() {
        assert_eq!(storage_mean(2.0, 7.0, 2.0, 1.0), 2.0);
        assert!((storage_mean(0.0, 1.0, 1.0, 1.0) - (1.0 - (-1f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn mean_solves_moment_ode() {
        // m' = α - β m
        let (alpha, beta, x) = (1.3, 0.7, 4.0);
        let h = 1e-5;
        for t in [0.1, 1.0, 3.0] {
            let d = (storage_mean(x, t + h, alpha, beta) - storage_mean(x, t - h, alpha, beta)) / (2.0 * h);
            assert!((d - (alpha - beta * storage_mean(x, t, alpha, beta))).abs() < 1e-8);
        }
    }
}
