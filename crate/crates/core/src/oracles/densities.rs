use nalgebra::Matrix2;
use statrs::function::beta::ln_beta;

use super::{domain, Result};
use crate::engine::PdmpModel;
use crate::rng::RandomSource;

fn check_dim1(alpha: [f64; 2], lambda: [f64; 2]) -> Result<()> {
    if alpha.iter().chain(&lambda).all(|v| v.is_finite() && *v > 0.0) {
        Ok(())
    } else {
        Err(domain("dim1 densities require positive alphas and lambdas"))
    }
}

/// Beta parameters `(a, b)` of the conditional law of `X` given mode `i`:
/// `Beta(λ_0/α_0, λ_1/α_1 + 1)` for mode 0 and `Beta(λ_0/α_0 + 1, λ_1/α_1)`
/// for mode 1.
pub fn dim1_mode_law(mode: usize, alpha: [f64; 2], lambda: [f64; 2]) -> Result<(f64, f64)> {
    check_dim1(alpha, lambda)?;
    let (a, b) = (lambda[0] / alpha[0], lambda[1] / alpha[1]);
    match mode {
        0 => Ok((a, b + 1.0)),
        1 => Ok((a + 1.0, b)),
        _ => Err(domain(format!("dim1 has modes 0 and 1, got {mode}"))),
    }
}

/// Stationary mode probabilities `(λ_1, λ_0) / (λ_0 + λ_1)`.
pub fn dim1_mode_weights(lambda: [f64; 2]) -> [f64; 2] {
    let total = lambda[0] + lambda[1];
    [lambda[1] / total, lambda[0] / total]
}

/// Conditional invariant density `p_i(x)` on `(0, 1)`.
pub fn dim1_invariant_density(x: f64, mode: usize, alpha: [f64; 2], lambda: [f64; 2]) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(domain(format!("dim1 density needs x in (0, 1), got {x}")));
    }
    let (a, b) = dim1_mode_law(mode, alpha, lambda)?;
    Ok(((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b)).exp())
}

/// Density `(b - a) e^{-(b - a) x}` of `|X|` under the invariant law of the
/// telegraph process; `X` itself is symmetric and the velocity is uniform on
/// `{-1, +1}`, independent of `X`.
pub fn telegraph_invariant_density(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0 < a && a < b) {
        return Err(domain(format!("telegraph requires 0 < a < b, got a = {a}, b = {b}")));
    }
    if !(x >= 0.0) {
        return Err(domain(format!("telegraph density needs x >= 0, got {x}")));
    }
    let k = b - a;
    Ok(k * (-k * x).exp())
}

/// Largest `α` with `⟨x - x̃, F^i(x) - F^i(x̃)⟩ ≤ -α ‖x - x̃‖²` on
/// `sample_count` random pairs drawn uniformly from the box `region`
/// (one `(lo, hi)` per coordinate), modes drawn uniformly.
pub fn dissipativity_estimate<M: PdmpModel + ?Sized>(
    model: &M,
    sample_count: usize,
    rng: &mut RandomSource,
    region: &[(f64, f64)],
) -> Result<f64> {
    let d = model.dim();
    if region.len() != d || sample_count == 0 {
        return Err(domain(format!(
            "need one interval per coordinate ({d}) and at least one sample"
        )));
    }
    let modes = model.mode_count();
    let mut worst = f64::NEG_INFINITY;
    let (mut x, mut y, mut fx, mut fy) = (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    for _ in 0..sample_count {
        for k in 0..d {
            let (lo, hi) = region[k];
            x[k] = lo + (hi - lo) * rng.uniform();
            y[k] = lo + (hi - lo) * rng.uniform();
        }
        let mode = ((rng.uniform() * modes as f64) as usize).min(modes - 1);
        model.field(mode, &x, &mut fx);
        model.field(mode, &y, &mut fy);
        let mut dot = 0.0;
        let mut norm2 = 0.0;
        for k in 0..d {
            let dx = x[k] - y[k];
            dot += dx * (fx[k] - fy[k]);
            norm2 += dx * dx;
        }
        if norm2 > 0.0 {
            worst = worst.max(dot / norm2);
        }
    }
    Ok(-worst)
}

/// Eigenvalues `(re, im)` of `A_p = p A_1 + (1 - p) A_0` for the switched
/// linear pair.
pub fn mixture_eigenvalues(alpha: f64, p: f64) -> [(f64, f64); 2] {
    let a = Matrix2::new(-alpha, 1.0 - p, -p, -alpha);
    let ev = a.complex_eigenvalues();
    [(ev[0].re, ev[0].im), (ev[1].re, ev[1].im)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Dim1Model, PlanarRotationModel, SwitchedLinearModel};
    use crate::quadrature::Quadrature;

    #[test]
    fn unit_ratios_give_linear_density() {
        for x in [0.1, 0.5, 0.9] {
            let p0 = dim1_invariant_density(x, 0, [1.0, 2.0], [1.0, 2.0]).unwrap();
            assert!((p0 - 2.0 * (1.0 - x)).abs() < 1e-13);
        }
    }

    #[test]
    fn swap_symmetry() {
        let (alpha, lambda) = ([0.7, 1.9], [0.4, 2.5]);
        let swapped = ([alpha[1], alpha[0]], [lambda[1], lambda[0]]);
        for x in [0.05, 0.3, 0.77] {
            let a = dim1_invariant_density(x, 1, swapped.0, swapped.1).unwrap();
            let b = dim1_invariant_density(1.0 - x, 0, alpha, lambda).unwrap();
            assert!((a - b).abs() < 1e-12 * b.max(1.0));
        }
    }

    #[test]
    fn blow_up_at_zero() {
        let p = dim1_invariant_density(1e-6, 0, [2.0, 1.0], [1.0, 1.0]).unwrap();
        assert!(p > 1e2);
    }

    #[test]
    fn densities_integrate_to_one() {
        let q = Quadrature::with_rel_tol(1e-10);
        for mode in 0..2 {
            let mass = q
                .integrate(|x| dim1_invariant_density(x, mode, [1.0, 1.0], [2.0, 1.5]).unwrap(), 1e-12, 1.0 - 1e-12)
                .unwrap()
                .value;
            assert!((mass - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn dim1_domain_errors() {
        assert!(dim1_invariant_density(0.0, 0, [1.0, 1.0], [1.0, 1.0]).is_err());
        assert!(dim1_invariant_density(1.5, 1, [1.0, 1.0], [1.0, 1.0]).is_err());
    }

    #[test]
    fn telegraph_density() {
        assert_eq!(telegraph_invariant_density(0.0, 1.0, 2.0).unwrap(), 1.0);
        assert!(telegraph_invariant_density(1.0, 2.0, 1.0).is_err());
        let q = Quadrature::default();
        let mean = q
            .integrate(|x| x * telegraph_invariant_density(x, 1.0, 2.0).unwrap(), 0.0, 60.0)
            .unwrap()
            .value;
        assert!((mean - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dissipativity_of_zoo_fields() {
        let mut rng = RandomSource::new(3, 0);
        let dim1 = Dim1Model {
            alpha: [2.0, 2.0],
            lambda: [1.0, 1.0],
        };
        let est = dissipativity_estimate(&dim1, 1000, &mut rng, &[(-5.0, 5.0)]).unwrap();
        assert!((est - 2.0).abs() < 1e-12);

        let rot = PlanarRotationModel { lambda: [1.0, 1.0] };
        let est = dissipativity_estimate(&rot, 1000, &mut rng, &[(-5.0, 5.0), (-5.0, 5.0)]).unwrap();
        assert!((est - 1.0).abs() < 1e-12);

        let sw = SwitchedLinearModel { alpha: 0.5, r: 1.0 };
        let est = dissipativity_estimate(&sw, 20_000, &mut rng, &[(-5.0, 5.0), (-5.0, 5.0)]).unwrap();
        assert!((-1e-12..0.01).contains(&est), "{est}");
    }

    #[test]
    fn mixture_real_parts() {
        for k in 0..=20 {
            let p = k as f64 / 20.0;
            for (re, im) in mixture_eigenvalues(0.3, p) {
                assert!((re + 0.3).abs() < 1e-12);
                assert!((im.abs() - (p * (1.0 - p)).sqrt()).abs() < 1e-12);
            }
        }
    }
}
