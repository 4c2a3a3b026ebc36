//! Moments of the normalized exponential-Brownian average A_t/t with
//! A_t = ∫₀^t ℰ_s ds and ℰ_s = exp(B_s − s/2).

use serde::Serialize;

use crate::closed_forms::{asian_a2, asian_laplace_atilde, c_quadratic};
use crate::error::{ensure, Result};
use crate::mc::{par_samples, try_par_samples};
use crate::quad::{integrate, QuadOptions};
use crate::report::CheckReport;
use crate::samplers::{beta, exp1, gamma, normal};
use crate::stats::{ks_two_sample, EmpiricalDistribution, McEstimate};

/// Trapezoid steps per unit time for pathwise integrals.
pub const STEPS_PER_UNIT: usize = 2048;

/// Coefficients c_j with exp(½C(s)) = ∏ exp(c_j s_j), read off
/// `c_quadratic` so that both share one definition of C.
fn exponent_coefficients(n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        // C is linear in the ordered times: probe the j-th unit direction
        let mut s = vec![0.0; n];
        for v in s.iter_mut().skip(j) {
            *v = 1.0;
        }
        let mut s0 = vec![0.0; n];
        for v in s0.iter_mut().skip(j + 1) {
            *v = 1.0;
        }
        out.push(0.5 * (c_quadratic(&s)? - c_quadratic(&s0)?));
    }
    Ok(out)
}

/// ∫ over 0 < s₁ < … < s_m < x of ∏ exp(c_j s_j), by nesting 1-d adaptive
/// rules; inner levels get a tighter tolerance.
fn simplex_integral(c: &[f64], x: f64, tol: f64) -> Result<f64> {
    match c.split_last() {
        None => Ok(1.0),
        Some((&cm, rest)) => {
            let opts = QuadOptions {
                abs_tol: tol,
                rel_tol: 1e-11,
                ..QuadOptions::default()
            };
            let inner_tol = tol * 0.1;
            let v = integrate(
                |s| (cm * s).exp() * simplex_integral(rest, s, inner_tol).unwrap_or(f64::NAN),
                0.0,
                x,
                opts,
            )?;
            Ok(v.value)
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// tⁿ a_n(t) = n!·∫_{simplex(t)} exp(½C(s)) ds.
fn t_pow_a_n(n: usize, t: f64) -> Result<f64> {
    let c = exponent_coefficients(n)?;
    Ok(factorial(n) * simplex_integral(&c, t, 1e-13)?)
}

/// a_n(t) = E[(A_t/t)ⁿ] = (n!/tⁿ)·∫_{simplex(t)} exp(½C(s)) ds, n ≤ 4.
pub fn a_n_quadrature(n: usize, t: f64) -> Result<f64> {
    ensure((1..=4).contains(&n), || {
        format!("quadrature supports 1 ≤ n ≤ 4, got {n}")
    })?;
    ensure(t > 0.0, || format!("t must be positive, got {t}"))?;
    Ok(t_pow_a_n(n, t)? / t.powi(n as i32))
}

/// Monte Carlo of a_n(t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsianMc {
    /// Richardson-extrapolated trapezoid estimate.
    pub estimate: McEstimate,
    /// Fine minus coarse (every other point) trapezoid, on the same paths.
    pub refinement_gap: McEstimate,
}

impl AsianMc {
    /// True when the grid bias is resolved: the refinement gap is within
    /// k standard errors of zero or below a tenth of the estimate's error.
    pub fn grid_ok(&self, k: f64) -> bool {
        self.refinement_gap.z_score(0.0).abs() <= k
            || self.refinement_gap.mean.abs() <= 0.1 * self.estimate.std_error
    }
}

/// Fine and coarse trapezoid integrals of ℰ on [0, t] along a path driven
/// by `steps` Gaussian increments.
fn path_average<R: rand::Rng + ?Sized>(
    rng: &mut R,
    t: f64,
    steps: usize,
    lift: f64,
    drift: f64,
) -> (f64, f64) {
    let (fine, coarse, _) = tilted_path_average(rng, t, steps, lift, drift, None);
    (fine, coarse)
}

/// As `path_average`, with the Brownian part shifted by `tilt[i]` on step i.
/// Returns the log likelihood ratio of the unshifted law as a third value.
fn tilted_path_average<R: rand::Rng + ?Sized>(
    rng: &mut R,
    t: f64,
    steps: usize,
    lift: f64,
    drift: f64,
    tilt: Option<&[f64]>,
) -> (f64, f64, f64) {
    let h = t / steps as f64;
    let sh = h.sqrt();
    let (mut x, mut prev) = (0.0f64, 1.0f64);
    let (mut fine, mut coarse, mut log_w) = (0.0, 0.0, 0.0);
    let mut pair_start = 1.0;
    for i in 1..=steps {
        let z = normal(rng);
        let d = tilt.map_or(0.0, |th| th[i - 1]);
        log_w -= d * sh * z + 0.5 * d * d * h;
        x += (drift + d) * h + sh * z;
        let e = (lift * x).exp();
        fine += 0.5 * h * (prev + e);
        if i % 2 == 0 {
            coarse += h * (pair_start + e);
            pair_start = e;
        }
        prev = e;
    }
    if steps % 2 == 1 {
        coarse += 0.5 * h * (pair_start + prev);
    }
    (fine, coarse, log_w)
}

/// Deterministic drift that dominates E[(A_t/t)ⁿ]: the maximizer of
/// n·ln ∫ e^{φ(u)−u/2} du − ½∫φ'² satisfies
/// φ'(s) = n·∫_s^t e^{φ−u/2} du / ∫_0^t e^{φ−u/2} du, solved by damped
/// fixed-point iteration on the step midpoints.
fn moment_tilt(n: u32, t: f64, steps: usize) -> Vec<f64> {
    let h = t / steps as f64;
    let nf = f64::from(n);
    let mut theta = vec![nf; steps];
    let mut w = vec![0.0; steps];
    for _ in 0..200 {
        let mut phi = 0.0;
        for (i, wi) in w.iter_mut().enumerate() {
            phi += theta[i] * h;
            *wi = (phi - 0.5 * theta[i] * h - 0.5 * (i as f64 + 0.5) * h).exp();
        }
        let total: f64 = w.iter().sum();
        let mut tail = total;
        let mut change = 0.0f64;
        for (th, &wi) in theta.iter_mut().zip(&w) {
            let target = nf * (tail - 0.5 * wi) / total;
            tail -= wi;
            let next = 0.5 * (*th + target);
            change = change.max((next - *th).abs());
            *th = next;
        }
        if change < 1e-10 {
            break;
        }
    }
    theta
}

/// MC of E[(A_t/t)ⁿ] with STEPS_PER_UNIT trapezoid steps per unit time and
/// one Richardson step (4·fine − coarse)/3.
///
/// Paths are sampled under a drift shift toward the paths that dominate the
/// n-th moment and reweighted by the exact Girsanov factor of the discrete
/// increments. Without it the estimator is so heavy-tailed for n ≥ 3 that its
/// sample standard error is meaningless.
pub fn a_n_mc(seed: u64, n: u32, t: f64, paths: usize) -> Result<AsianMc> {
    ensure(n >= 1 && t > 0.0, || {
        format!("need n ≥ 1 and t > 0, got {n}, {t}")
    })?;
    let steps = ((t * STEPS_PER_UNIT as f64).ceil() as usize).max(2) & !1;
    let tilt = moment_tilt(n, t, steps);
    let rows = par_samples(seed, paths, |rng| {
        let (f, c, log_w) = tilted_path_average(rng, t, steps, 1.0, -0.5, Some(&tilt));
        let (f, c) = ((f / t).powi(n as i32), (c / t).powi(n as i32));
        let w = log_w.exp();
        (w * (4.0 * f - c) / 3.0, w * (f - c))
    });
    Ok(AsianMc {
        estimate: McEstimate::from_samples(&rows.iter().map(|r| r.0).collect::<Vec<_>>())?,
        refinement_gap: McEstimate::from_samples(&rows.iter().map(|r| r.1).collect::<Vec<_>>())?,
    })
}

/// a_n by MC against quadrature (or the closed form for n ≤ 2), 3σ.
pub fn a_n_check(seed: u64, n: u32, t: f64, paths: usize, k: f64) -> Result<Vec<CheckReport>> {
    let quad = a_n_quadrature(n as usize, t)?;
    let mc = a_n_mc(seed, n, t, paths)?;
    let mut out = vec![CheckReport::z_test(
        format!("a_{n}({t}) by Monte Carlo"),
        quad,
        mc.estimate,
        k,
        seed,
    )
    .with_note(format!(
        "trapezoid refinement gap {:.2e} ± {:.1e}",
        mc.refinement_gap.mean, mc.refinement_gap.std_error
    ))];
    if !mc.grid_ok(k) {
        out[0] = out
            .remove(0)
            .with_note("grid coarseness warning: refinement gap is significant");
    }
    match n {
        1 => out.push(CheckReport::abs_tol(
            format!("a_1({t}) by quadrature"),
            1.0,
            quad,
            1e-10,
        )),
        2 => out.push(CheckReport::abs_tol(
            format!("a_2({t}) by quadrature"),
            asian_a2(t)?,
            quad,
            1e-6,
        )),
        _ => {}
    }
    Ok(out)
}

/// ∫₀^∞ e^{−αt} tⁿ a_n(t) dt by quadrature against the closed form,
/// relative 1e-4. Needs α > n(n−1)/2.
pub fn laplace_identity_check(n: usize, alpha: f64) -> Result<CheckReport> {
    let closed = asian_laplace_atilde(alpha, n as u32)?;
    ensure((1..=3).contains(&n), || {
        format!("Laplace quadrature supports 1 ≤ n ≤ 3, got {n}")
    })?;
    // the integrand decays like exp(−(α − n(n−1)/2)t) times a polynomial
    let rate = alpha - (n * (n - 1)) as f64 / 2.0;
    let v = integrate(
        |t| (-alpha * t).exp() * t_pow_a_n(n, t).unwrap_or(f64::NAN),
        0.0,
        60.0 / rate,
        QuadOptions {
            abs_tol: 1e-12 * closed,
            rel_tol: 1e-9,
            ..QuadOptions::default()
        },
    )?;
    Ok(CheckReport::rel_tol(
        format!("Laplace transform of t^{n} a_{n} at alpha={alpha}"),
        closed,
        v.value,
        1e-4,
    ))
}

/// Convex test functions for the monotonicity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ConvexFn {
    Identity,
    CallAt(f64),
    Square,
    AbsDev,
}

impl ConvexFn {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ConvexFn::Identity => x,
            ConvexFn::CallAt(k) => (x - k).max(0.0),
            ConvexFn::Square => x * x,
            ConvexFn::AbsDev => (x - 1.0).abs(),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            ConvexFn::Identity => "x".into(),
            ConvexFn::CallAt(k) => format!("(x-{k})+"),
            ConvexFn::Square => "x^2".into(),
            ConvexFn::AbsDev => "|x-1|".into(),
        }
    }
}

/// E[g(A_t/t)] along increasing `times`, all read from one path per draw.
/// Each adjacent difference must be ≥ −k standard errors; for g(x) = x the
/// differences must be within k standard errors of zero.
pub fn monotonicity_check(
    seed: u64,
    g: ConvexFn,
    times: &[f64],
    paths: usize,
    k: f64,
) -> Result<Vec<CheckReport>> {
    ensure(
        !times.is_empty() && times.windows(2).all(|w| w[0] < w[1]) && times[0] > 0.0,
        || "times must be positive and increasing".into(),
    )?;
    let t_max = times[times.len() - 1];
    let h = 1.0 / STEPS_PER_UNIT as f64;
    let marks: Vec<usize> = times.iter().map(|&t| (t / h).round() as usize).collect();
    ensure(
        marks
            .iter()
            .zip(times)
            .all(|(&m, &t)| (m as f64 * h - t).abs() < 1e-9),
        || format!("times must be multiples of 1/{STEPS_PER_UNIT}"),
    )?;
    let steps = marks[marks.len() - 1];
    let rows = par_samples(seed, paths, |rng| {
        let (mut x, mut prev, mut acc) = (0.0f64, 1.0f64, 0.0);
        let mut vals = Vec::with_capacity(marks.len());
        let mut next = 0;
        for i in 1..=steps {
            x += -0.5 * h + h.sqrt() * normal(rng);
            let e = x.exp();
            acc += 0.5 * h * (prev + e);
            prev = e;
            if i == marks[next] {
                vals.push(g.eval(acc / times[next]));
                next += 1;
            }
        }
        vals
    });
    let _ = t_max;
    let mut out = Vec::new();
    for j in 1..times.len() {
        let d =
            McEstimate::from_samples(&rows.iter().map(|v| v[j] - v[j - 1]).collect::<Vec<_>>())?;
        let name = format!(
            "E[{}] of A_t/t from t={} to t={}",
            g.name(),
            times[j - 1],
            times[j]
        );
        out.push(match g {
            ConvexFn::Identity => CheckReport::z_test(format!("{name} constant"), 0.0, d, k, seed),
            _ => CheckReport::at_least(format!("{name} non-decreasing"), 0.0, d, k, false, seed),
        });
    }
    Ok(out)
}

/// a₂ and the quadrature a_n are at least 1 and a₂ increases on `times`.
pub fn a_n_grid_checks(times: &[f64]) -> Result<Vec<CheckReport>> {
    let mut worst: f64 = f64::INFINITY;
    for &t in times {
        for n in 1..=3 {
            worst = worst.min(a_n_quadrature(n, t)?);
        }
    }
    let a2: Vec<f64> = times.iter().map(|&t| asian_a2(t)).collect::<Result<_>>()?;
    let drop = a2
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![
        CheckReport::at_most("1 - min a_n(t) over the grid (n <= 3)", 1.0 - worst, 1e-12),
        CheckReport::at_most("largest decrease of a_2 along the grid", drop, 0.0),
    ])
}

/// ∫₀^{T_λ} exp(2(B_s + νs)) ds with T_λ ~ Exp(λ), against β_{1,a}/(2γ_b)
/// where μ = √(2λ + ν²), a = (μ+ν)/2, b = (μ−ν)/2. Two-sample KS, plus the
/// same KS with half the steps as a grid-bias check.
pub fn exp_time_identity_check(
    seed: u64,
    nu: f64,
    lambda: f64,
    n: usize,
    alpha: f64,
) -> Result<Vec<CheckReport>> {
    ensure(lambda > 0.0, || format!("λ must be positive, got {lambda}"))?;
    let mu = (2.0 * lambda + nu * nu).sqrt();
    let (a, b) = (0.5 * (mu + nu), 0.5 * (mu - nu));
    ensure(a > 0.0 && b > 0.0, || {
        format!("need a, b > 0, got {a}, {b}")
    })?;
    let rows = par_samples(seed, n, |rng| {
        let t = exp1(rng) / lambda;
        let steps = ((t * STEPS_PER_UNIT as f64).ceil() as usize).max(2) & !1;
        let (f, c) = path_average(rng, t, steps.max(2), 2.0, nu);
        ((4.0 * f - c) / 3.0, c)
    });
    let oracle = try_par_samples(
        crate::rng::derive_seed(seed, "beta-gamma"),
        n,
        |rng| -> Result<f64> { Ok(beta(rng, 1.0, a)? / (2.0 * gamma(rng, b)?)) },
    )?;
    let oracle = EmpiricalDistribution::new(oracle)?;
    let fine = ks_two_sample(
        &EmpiricalDistribution::new(rows.iter().map(|r| r.0).collect())?,
        &oracle,
    )?;
    let coarse = ks_two_sample(
        &EmpiricalDistribution::new(rows.iter().map(|r| r.1).collect())?,
        &oracle,
    )?;
    let mut out = vec![CheckReport::ks(
        format!("integral of exp(2(B+{nu}s)) up to Exp({lambda}) time ~ beta(1,{a:.4})/(2 gamma({b:.4}))"),
        fine,
        alpha,
        seed,
    )];
    out.push(
        CheckReport::ks("same with half the trapezoid steps", coarse, alpha, seed)
            .diagnostic()
            .with_note(if coarse.p_value > alpha {
                "no grid bias visible"
            } else {
                "grid-bias warning"
            }),
    );
    Ok(out)
}

/// (t, a_n(t)) rows for n = 1..=n_max on a uniform t grid.
pub fn a_n_curve(n_max: usize, t_max: f64, points: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    ensure(points >= 2 && t_max > 0.0, || {
        "need at least 2 points and t_max > 0".into()
    })?;
    (1..=points)
        .map(|i| {
            let t = t_max * i as f64 / points as f64;
            let row = (1..=n_max)
                .map(|n| a_n_quadrature(n, t))
                .collect::<Result<Vec<_>>>()?;
            Ok((t, row))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_matches_closed_forms() {
        assert!((a_n_quadrature(1, 0.7).unwrap() - 1.0).abs() < 1e-12);
        let e = std::f64::consts::E;
        assert!((a_n_quadrature(2, 1.0).unwrap() - 2.0 * (e - 2.0)).abs() < 1e-9);
        assert!(a_n_quadrature(5, 1.0).is_err());
    }

    #[test]
    fn coefficients_for_n3() {
        // C = 6 s₁ + 2(s₂ − s₁) for n = 3
        let c = exponent_coefficients(3).unwrap();
        assert_eq!(c, vec![2.0, 1.0, 0.0]);
    }

    #[test]
    fn laplace_small_cases() {
        for (n, a) in [(1, 2.0), (2, 5.0), (3, 10.0)] {
            let r = laplace_identity_check(n, a).unwrap();
            assert!(r.pass, "{r:?}");
        }
        assert!(laplace_identity_check(3, 2.0).is_err());
    }

    #[test]
    fn identity_function_mc() {
        let m = a_n_mc(1, 1, 1.0, 2000).unwrap();
        assert!(m.estimate.z_score(1.0).abs() < 4.0);
    }

    #[test]
    fn tilt_solves_its_fixed_point() {
        // small t: φ' ≈ n(1 − s/t)
        let th = moment_tilt(3, 0.01, 100);
        assert!(
            (th[0] - 3.0).abs() < 0.05 && th[99] < 0.05,
            "{} {}",
            th[0],
            th[99]
        );
        // decreasing, between 0 and n
        let th = moment_tilt(4, 2.0, 4096);
        assert!(th.windows(2).all(|w| w[1] <= w[0]) && th[0] <= 4.0 && th[4095] >= 0.0);
    }

    #[test]
    fn tilted_estimate_is_tight_for_large_moments() {
        let q = a_n_quadrature(4, 2.0).unwrap();
        let m = a_n_mc(3, 4, 2.0, 4000).unwrap();
        assert!(m.estimate.z_score(q).abs() < 4.0, "{:?} vs {q}", m.estimate);
        assert!(m.estimate.std_error < 0.03 * q);
    }
}
