//! Hermite coefficients of the generating function h^{(l,ν)}.

use super::candidate::PFCandidate;
use crate::error::{ensure, Result};

/// Classical two-variable Hermite polynomial from
/// exp(λx − λ²u/2) = Σ λⁿ/n!·H_n(x,u).
pub fn hermite(n: usize, x: f64, u: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = x * cur - k as f64 * u * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Coefficient of l^p ν^q in exp(al + bν − cν²/2 − dl²/2 + flν).
pub fn hermite_5var(p: usize, q: usize, a: f64, b: f64, c: f64, d: f64, f: f64) -> f64 {
    (0..=p.min(q))
        .map(|m| {
            f.powi(m as i32) / factorial(m) * hermite(p - m, a, d) * hermite(q - m, b, c)
                / (factorial(p - m) * factorial(q - m))
        })
        .sum()
}

/// H_{p,q}(s,t;x,y), the coefficient of l^p ν^q in h^{(l,ν)}(s,t;x,y).
/// It carries the factor e_s^{(t)} = exp(−2xy/(t−s)) that the l = ν = 0
/// term of the expansion requires.
pub fn pf_hermite_coeff(p: usize, q: usize, s: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    ensure(s < t, || format!("need s < t, got {s}, {t}"))?;
    let d = t - s;
    let base = (-2.0 * x * y / d).exp();
    Ok(base
        * hermite_5var(
            p,
            q,
            2.0 * (x + y) / d,
            -2.0 * (s * y + t * x) / d,
            4.0 * s * t / d,
            4.0 / d,
            2.0 * (s + t) / d,
        ))
}

/// H_{p,q} as a candidate (finite-difference residuals only).
pub fn hermite_candidate(p: usize, q: usize) -> PFCandidate {
    PFCandidate::new(format!("H_{{{p},{q}}}"), move |s, t, x, y| {
        pf_hermite_coeff(p, q, s, t, x, y).unwrap_or(f64::NAN)
    })
}
