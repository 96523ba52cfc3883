//! Moments and eigenpolynomials of the TCP process `L f(x) = f'(x) + λ (f(x/2) - f(x))`.
//!
//! The generator maps `x^k` to `k x^{k-1} - θ_k x^k` with
//! `θ_k = λ (1 - 2^{-k})`, so it is triangular on polynomials.

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use super::{domain, Result};

/// The pairing `∫ P_1 P_2 dμ` at `λ = 1` as printed in the literature this
/// crate follows; the moment expansion gives `-64/21` instead.
pub const PRINTED_P1_P2_PAIRING: f64 = -64.0 / 27.0;

fn theta(k: usize, lambda: f64) -> f64 {
    lambda * (1.0 - 0.5f64.powi(k as i32))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("tcp requires lambda > 0, got {lambda}")))
    }
}

/// `E_x(X_t^n)`:
/// `n!/∏θ_k + n! Σ_{m=1}^n (Σ_{k=0}^m x^k/k! ∏_{j=k, j≠m}^n 1/(θ_j - θ_m)) e^{-θ_m t}`,
/// with `θ_0 = 0`.
pub fn tcp_moment(n: usize, x: f64, t: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if !(x >= 0.0 && t >= 0.0) {
        return Err(domain("tcp moments require x >= 0 and t >= 0"));
    }
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let mut total = tcp_invariant_moment(n, lambda)?;
    for m in 1..=n {
        let tm = theta(m, lambda);
        let mut inner = 0.0;
        let mut x_pow = 1.0;
        let mut k_fact = 1.0;
        for k in 0..=m {
            if k > 0 {
                x_pow *= x;
                k_fact *= k as f64;
            }
            let prod: f64 = (k..=n)
                .filter(|&j| j != m)
                .map(|j| 1.0 / (theta(j, lambda) - tm))
                .product();
            inner += x_pow / k_fact * prod;
        }
        total += fact * inner * (-tm * t).exp();
    }
    Ok(total)
}

/// `n! / ∏_{k=1}^n θ_k`.
pub fn tcp_invariant_moment(n: usize, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok((1..=n).map(|k| k as f64 / theta(k, lambda)).product())
}

fn exact(value: f64) -> BigRational {
    BigRational::from_float(value).expect("finite value")
}

fn theta_exact(k: usize, lambda: &BigRational) -> BigRational {
    let half_pow = BigRational::new(BigInt::one(), BigInt::one() << k);
    lambda * (BigRational::one() - half_pow)
}

pub fn tcp_invariant_moment_exact(n: usize, lambda: f64) -> Result<BigRational> {
    check_lambda(lambda)?;
    let lam = exact(lambda);
    let mut m = BigRational::one();
    for k in 1..=n {
        m = m * BigRational::from_integer(k.into()) / theta_exact(k, &lam);
    }
    Ok(m)
}

/// Polynomial with exact rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPoly(pub Vec<BigRational>);

impl RationalPoly {
    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn coefficients_f64(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.0.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coefficients_f64().iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![BigRational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self(out)
    }

    pub fn scale(&self, by: &BigRational) -> Self {
        Self(self.0.iter().map(|c| c * by).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.0.len().max(other.0.len());
        let get = |p: &Self, k: usize| p.0.get(k).cloned().unwrap_or_else(BigRational::zero);
        Self((0..len).map(|k| get(self, k) - get(other, k)).collect())
    }
}

/// Exact action of the TCP generator on a polynomial.
pub fn tcp_generator_exact(p: &RationalPoly, lambda: f64) -> Result<RationalPoly> {
    check_lambda(lambda)?;
    let lam = exact(lambda);
    let mut out = vec![BigRational::zero(); p.0.len()];
    for (k, c) in p.0.iter().enumerate() {
        if k > 0 {
            out[k - 1] += c * BigRational::from_integer(k.into());
        }
        out[k] -= c * theta_exact(k, &lam);
    }
    Ok(RationalPoly(out))
}

/// Monic `P_n` with `L P_n = -θ_n P_n`, solved exactly by back substitution:
/// `c_k = (k + 1) c_{k+1} / (θ_k - θ_n)`.
pub fn tcp_eigenpoly_exact(n: usize, lambda: f64) -> Result<RationalPoly> {
    check_lambda(lambda)?;
    let lam = exact(lambda);
    let tn = theta_exact(n, &lam);
    let mut c = vec![BigRational::zero(); n + 1];
    c[n] = BigRational::one();
    for k in (0..n).rev() {
        c[k] = &c[k + 1] * BigRational::from_integer((k + 1).into()) / (theta_exact(k, &lam) - &tn);
    }
    Ok(RationalPoly(c))
}

/// Coefficients of `P_n`, lowest degree first.
pub fn tcp_eigenpoly(n: usize, lambda: f64) -> Result<Vec<f64>> {
    Ok(tcp_eigenpoly_exact(n, lambda)?.coefficients_f64())
}

/// `∫ P_m P_n dμ` expanded over the invariant moments.
pub fn tcp_pairing_integral_exact(m: usize, n: usize, lambda: f64) -> Result<BigRational> {
    let product = tcp_eigenpoly_exact(m, lambda)?.mul(&tcp_eigenpoly_exact(n, lambda)?);
    let mut total = BigRational::zero();
    for (k, c) in product.0.iter().enumerate() {
        if !c.is_zero() {
            total += c * tcp_invariant_moment_exact(k, lambda)?;
        }
    }
    Ok(total)
}

pub fn tcp_pairing_integral(m: usize, n: usize, lambda: f64) -> Result<f64> {
    let v = tcp_pairing_integral_exact(m, n, lambda)?;
    Ok(v.to_f64().unwrap_or(if v.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Moments solve `m_n' = n m_{n-1} - θ_n m_n`; integrate by RK4.
    fn moments_by_ode(n_max: usize, x: f64, t: f64, lambda: f64) -> Vec<f64> {
        let mut m: Vec<f64> = (0..=n_max).map(|k| x.powi(k as i32)).collect();
        let steps = 20_000;
        let h = t / steps as f64;
        let rhs = |m: &[f64]| -> Vec<f64> {
            (0..=n_max)
                .map(|k| {
                    let up = if k > 0 { k as f64 * m[k - 1] } else { 0.0 };
                    up - theta(k, lambda) * m[k]
                })
                .collect()
        };
        for _ in 0..steps {
            let k1 = rhs(&m);
            let m2: Vec<f64> = m.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
            let k2 = rhs(&m2);
            let m3: Vec<f64> = m.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
            let k3 = rhs(&m3);
            let m4: Vec<f64> = m.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
            let k4 = rhs(&m4);
            for i in 0..=n_max {
                m[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        m
    }

    #[test]
    fn moment_formula_matches_moment_ode() {
        for (x, t, lambda) in [(0.0, 1.0, 1.0), (3.0, 5.0, 1.0), (1.5, 2.0, 0.7)] {
            let ode = moments_by_ode(4, x, t, lambda);
            for n in 0..=4 {
                let f = tcp_moment(n, x, t, lambda).unwrap();
                assert!((f - ode[n]).abs() < 1e-9 * ode[n].abs().max(1.0), "n={n} x={x} t={t}: {f} vs {}", ode[n]);
            }
        }
    }

    #[test]
    fn first_moment_from_zero() {
        for t in [0.3, 1.0, 4.0] {
            let v = tcp_moment(1, 0.0, t, 1.0).unwrap();
            assert!((v - 2.0 * (1.0 - (-t / 2.0f64).exp())).abs() < 1e-14);
        }
    }

    #[test]
    fn zeroth_moment_is_one() {
        assert_eq!(tcp_moment(0, 5.0, 3.0, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn second_moment_reaches_stationary_value() {
        for x in [0.0, 2.0, 10.0] {
            let v = tcp_moment(2, x, 1e3, 1.0).unwrap();
            assert!((v - 16.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn invariant_moments() {
        assert_eq!(tcp_invariant_moment(0, 1.0).unwrap(), 1.0);
        assert!((tcp_invariant_moment(1, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((tcp_invariant_moment(3, 1.0).unwrap() - 128.0 / 7.0).abs() < 1e-13);
        assert_eq!(tcp_invariant_moment_exact(3, 1.0).unwrap(), q(128, 7));
    }

    #[test]
    fn low_order_eigenpolys() {
        assert_eq!(tcp_eigenpoly_exact(0, 1.0).unwrap(), RationalPoly::from_integers(&[1]));
        assert_eq!(tcp_eigenpoly_exact(1, 1.0).unwrap(), RationalPoly::from_integers(&[-2, 1]));
        assert_eq!(
            tcp_eigenpoly_exact(2, 1.0).unwrap(),
            RationalPoly(vec![q(32, 3), q(-8, 1), q(1, 1)])
        );
    }

    #[test]
    fn eigen_relation_is_exact() {
        for lambda in [1.0, 0.5, 3.0] {
            let lam = exact(lambda);
            for n in 0..=8 {
                let p = tcp_eigenpoly_exact(n, lambda).unwrap();
                let lp = tcp_generator_exact(&p, lambda).unwrap();
                let expected = p.scale(&-theta_exact(n, &lam));
                assert!(lp.sub(&expected).is_zero(), "n = {n}, lambda = {lambda}");
            }
        }
    }

    #[test]
    fn second_eigenpoly_eigenvalue_on_points() {
        let p = tcp_eigenpoly_exact(2, 1.0).unwrap();
        let lp = tcp_generator_exact(&p, 1.0).unwrap();
        for x in 0..4 {
            let x = BigRational::from_integer(x.into());
            assert_eq!(lp.eval(&x), -q(3, 4) * p.eval(&x));
        }
    }

    #[test]
    fn pairings() {
        assert_eq!(tcp_pairing_integral_exact(0, 1, 1.0).unwrap(), q(0, 1));
        assert_eq!(tcp_pairing_integral_exact(1, 1, 1.0).unwrap(), q(4, 3));
        let p12 = tcp_pairing_integral_exact(1, 2, 1.0).unwrap();
        assert_eq!(p12, q(-64, 21));
        assert!((tcp_pairing_integral(1, 2, 1.0).unwrap() - PRINTED_P1_P2_PAIRING).abs() > 0.5);
    }

    #[test]
    fn pairing_by_brute_force_expansion() {
        // (x - 2)(x² - 8x + 32/3) = x³ - 10x² + (80/3)x - 64/3
        let m = |k| tcp_invariant_moment(k, 1.0).unwrap();
        let direct = m(3) - 10.0 * m(2) + 80.0 / 3.0 * m(1) - 64.0 / 3.0;
        assert!((direct + 64.0 / 21.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_lambda() {
        assert!(tcp_moment(1, 0.0, 1.0, 0.0).is_err());
        assert!(tcp_eigenpoly(2, -1.0).is_err());
    }
}
