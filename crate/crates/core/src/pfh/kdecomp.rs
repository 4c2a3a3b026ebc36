//! The K⁺/K⁻ rewritings of the exponential PF functions as space-time
//! harmonic functions of one pair (u, ξ).

use crate::error::{ensure, Result};

fn k_plus(m_prime: f64, u: f64, xi: f64) -> f64 {
    (-2.0 * m_prime * xi - 2.0 * m_prime * m_prime * u).exp()
}

fn k_minus(x_prime: f64, u: f64, xi: f64) -> f64 {
    (-2.0 * x_prime * (xi + x_prime * u)).exp()
}

/// max |exp(−2xm/(t−s)) − K⁺(s/(t−s), (xt−ms)/(√t(t−s)))| over the points,
/// relative to max(1, |lhs|).
pub fn k_decomposition_check(t: f64, m: f64, points: &[(f64, f64)]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(s, x) in points {
        ensure(s > 0.0 && s < t, || {
            format!("need 0 < s < t, got s = {s}, t = {t}")
        })?;
        let d = t - s;
        let lhs = (-2.0 * x * m / d).exp();
        let rhs = k_plus(m / t.sqrt(), s / d, (x * t - m * s) / (t.sqrt() * d));
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    Ok(worst)
}

/// max |exp(−2xy/(t−s)) − K⁻(s/(t−s), √s(y−x)/(t−s))| over points (s, x, y),
/// relative to max(1, |lhs|).
pub fn k_minus_check(t: f64, points: &[(f64, f64, f64)]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(s, x, y) in points {
        ensure(s > 0.0 && s < t, || {
            format!("need 0 < s < t, got s = {s}, t = {t}")
        })?;
        let d = t - s;
        let lhs = (-2.0 * x * y / d).exp();
        let rhs = k_minus(x / s.sqrt(), s / d, s.sqrt() * (y - x) / d);
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand::Rng;

    #[test]
    fn identities_hold() {
        let mut r = RngStream::new(21, 0);
        let pts: Vec<(f64, f64)> = (0..100)
            .map(|_| (0.1 + 1.4 * r.random::<f64>(), r.random::<f64>() - 0.5))
            .collect();
        assert!(k_decomposition_check(2.0, 1.0, &pts).unwrap() < 1e-12);
        assert_eq!(k_decomposition_check(2.0, 0.0, &pts).unwrap(), 0.0);
        let pts3: Vec<(f64, f64, f64)> = (0..100)
            .map(|_| {
                (
                    0.1 + 1.4 * r.random::<f64>(),
                    r.random::<f64>() - 0.5,
                    r.random::<f64>() - 0.5,
                )
            })
            .collect();
        assert!(k_minus_check(2.0, &pts3).unwrap() < 1e-12);
        assert!(k_decomposition_check(2.0, 1.0, &[(2.5, 0.0)]).is_err());
    }
}
