//! Exact samplers for the elementary laws used throughout the crate.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Beta, Distribution, Exp1, Gamma, Poisson, StandardNormal};
use std::f64::consts::PI;

use crate::error::{domain, ensure, Result};

#[inline]
pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform on the open interval (0, 1).
#[inline]
pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Open01.sample(rng)
}

/// Standard exponential 𝐞.
#[inline]
pub fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Symmetric ±1.
#[inline]
pub fn sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// m̃₁ = ε√(2𝐞), density ½|μ|e^{−μ²/2}.
pub fn m_tilde<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    sign(rng) * (2.0 * exp1(rng)).sqrt()
}

pub fn m_tilde_cdf(mu: f64) -> f64 {
    let tail = 0.5 * (-0.5 * mu * mu).exp();
    if mu < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Arcsine law on (0, t): t·sin²(πU/2).
pub fn arcsine<R: Rng + ?Sized>(rng: &mut R, t: f64) -> Result<f64> {
    ensure(t > 0.0, || {
        format!("arcsine horizon must be positive, got {t}")
    })?;
    let s = (0.5 * PI * uniform(rng)).sin();
    Ok(t * s * s)
}

pub fn arcsine_cdf(u: f64, t: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= t {
        1.0
    } else {
        2.0 / PI * (u / t).sqrt().asin()
    }
}

/// Brownian first hitting time of x: T_x = x²/N².
pub fn hitting_time<R: Rng + ?Sized>(rng: &mut R, x: f64) -> Result<f64> {
    ensure(x.is_finite(), || format!("level must be finite, got {x}"))?;
    let n = normal(rng);
    Ok(x * x / (n * n))
}

pub fn beta<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> Result<f64> {
    let d = Beta::new(a, b).map_err(|e| domain(format!("Beta({a}, {b}): {e}")))?;
    Ok(d.sample(rng))
}

/// Gamma(shape, 1).
pub fn gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> Result<f64> {
    let d = Gamma::new(shape, 1.0).map_err(|e| domain(format!("Gamma({shape}): {e}")))?;
    Ok(d.sample(rng))
}

pub fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| domain(format!("Poisson({mean}): {e}")))?;
    Ok(d.sample(rng) as u64)
}

/// Inverse Gaussian with the given mean and shape (Michael–Schucany–Haas).
///
/// The first hitting time of a > 0 by B_t + νt, ν > 0, has mean a/ν and
/// shape a².
pub fn inverse_gaussian<R: Rng + ?Sized>(rng: &mut R, mean: f64, shape: f64) -> Result<f64> {
    ensure(mean > 0.0 && shape > 0.0, || {
        format!("inverse Gaussian needs mean, shape > 0, got {mean}, {shape}")
    })?;
    let n = normal(rng);
    let y = n * n;
    let mu = mean;
    let x = mu + mu * mu * y / (2.0 * shape)
        - mu / (2.0 * shape) * (4.0 * mu * shape * y + mu * mu * y * y).sqrt();
    if uniform(rng) <= mu / (mu + x) {
        Ok(x)
    } else {
        Ok(mu * mu / x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::special::{norm_cdf, prob_abs_normal_le};
    use crate::stats::{ks_statistic, EmpiricalDistribution};

    const N: usize = 100_000;

    fn ks_p<F: Fn(f64) -> f64>(xs: Vec<f64>, cdf: F) -> f64 {
        ks_statistic(&EmpiricalDistribution::new(xs).unwrap(), cdf)
            .unwrap()
            .p_value
    }

    #[test]
    fn normal_and_uniform() {
        let mut r = RngStream::new(1, 0);
        let xs: Vec<f64> = (0..N).map(|_| normal(&mut r)).collect();
        assert!(ks_p(xs, norm_cdf) > 0.01);
        let us: Vec<f64> = (0..N).map(|_| uniform(&mut r)).collect();
        assert!(us.iter().all(|&u| u > 0.0 && u < 1.0));
        assert!(ks_p(us, |x| x.clamp(0.0, 1.0)) > 0.01);
    }

    #[test]
    fn m_tilde_law() {
        let mut r = RngStream::new(2, 0);
        let xs: Vec<f64> = (0..N).map(|_| m_tilde(&mut r)).collect();
        assert!(ks_p(xs, m_tilde_cdf) > 0.01);
    }

    #[test]
    fn arcsine_law() {
        let mut r = RngStream::new(3, 0);
        let xs: Vec<f64> = (0..N).map(|_| arcsine(&mut r, 2.0).unwrap()).collect();
        let below = xs.iter().filter(|&&g| g <= 1.0).count() as f64 / N as f64;
        assert!((below - 0.5).abs() < 3.0 * (0.25 / N as f64).sqrt());
        assert!(ks_p(xs, |u| arcsine_cdf(u, 2.0)) > 0.01);
        assert!(arcsine(&mut r, 0.0).is_err());
    }

    #[test]
    fn hitting_time_law() {
        let mut r = RngStream::new(4, 0);
        let xs: Vec<f64> = (0..N).map(|_| hitting_time(&mut r, 1.0).unwrap()).collect();
        let above = xs.iter().filter(|&&t| t > 1.0).count() as f64 / N as f64;
        let p = prob_abs_normal_le(1.0);
        assert!((above - p).abs() < 3.0 * (p * (1.0 - p) / N as f64).sqrt());
        // P(T_x ≤ t) = 2(1 − Φ(|x|/√t))
        assert!(
            ks_p(xs, |t| if t <= 0.0 {
                0.0
            } else {
                2.0 * (1.0 - norm_cdf(1.0 / t.sqrt()))
            }) > 0.01
        );
    }

    #[test]
    fn beta_gamma_against_statrs() {
        use statrs::distribution::{Beta as SBeta, ContinuousCDF, Gamma as SGamma};
        let mut r = RngStream::new(5, 0);
        let b = SBeta::new(0.7, 2.5).unwrap();
        let xs: Vec<f64> = (0..N).map(|_| beta(&mut r, 0.7, 2.5).unwrap()).collect();
        assert!(ks_p(xs, |x| b.cdf(x)) > 0.01);
        let g = SGamma::new(0.3, 1.0).unwrap();
        let xs: Vec<f64> = (0..N).map(|_| gamma(&mut r, 0.3).unwrap()).collect();
        assert!(ks_p(xs, |x| g.cdf(x)) > 0.01);
        assert!(beta(&mut r, -1.0, 1.0).is_err());
        assert!(gamma(&mut r, 0.0).is_err());
    }

    #[test]
    fn inverse_gaussian_law() {
        // first passage of B_t + t to a = 1.5: P(T ≤ s) closed form
        let (a, nu) = (1.5, 1.0);
        let cdf = |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            let r = s.sqrt();
            norm_cdf((nu * s - a) / r) + (2.0 * nu * a).exp() * norm_cdf((-nu * s - a) / r)
        };
        let mut rg = RngStream::new(6, 0);
        let xs: Vec<f64> = (0..N)
            .map(|_| inverse_gaussian(&mut rg, a / nu, a * a).unwrap())
            .collect();
        assert!(ks_p(xs, cdf) > 0.01);
    }

    #[test]
    fn poisson_mean() {
        let mut r = RngStream::new(7, 0);
        let m: f64 = (0..N)
            .map(|_| poisson(&mut r, 1.0).unwrap() as f64)
            .sum::<f64>()
            / N as f64;
        assert!((m - 1.0).abs() < 3.0 / (N as f64).sqrt());
        assert_eq!(poisson(&mut r, 0.0).unwrap(), 0);
    }
}
