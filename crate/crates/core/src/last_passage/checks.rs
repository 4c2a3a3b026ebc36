use rand::Rng;
use serde::Serialize;

use super::engine::{
    crossing_prob, finite_horizon_with_end, sample_g_finite_horizon, sample_gk_inv_bes3,
    sample_gk_killed_bm, sample_last_passage_transient, sample_sup_gbm, HorizonPolicy,
};
use crate::closed_forms::{
    bs_put_gbm, conditional_given_g, expected_local_time_gbm, g_nu_law, laplace_gk_inv_bes3,
    laplace_gk_killed_bm, sigma_pf, DriftLevel,
};
use crate::error::{ensure, Result};
use crate::mc::{par_samples, try_par_samples};
use crate::paths::fill_bridge;
use crate::report::CheckReport;
use crate::rng::derive_seed;
use crate::samplers::{exp1, inverse_gaussian, normal, uniform};
use crate::special::prob_abs_normal_le;
use crate::stats::{ks_statistic, ks_two_sample, spearman, EmpiricalDistribution, McEstimate};

/// Censoring above this rate fails a check.
const CENSORING_LIMIT: f64 = 1e-3;

fn empirical(xs: Vec<f64>) -> Result<EmpiricalDistribution> {
    EmpiricalDistribution::new(xs)
}

/// KS of bridge-corrected g_l^{(ν)}(t) samples against the closed-form
/// sub-probability law (atom at 0 plus density).
pub fn g_law_check(
    seed: u64,
    nu: f64,
    l: f64,
    t: f64,
    cells: usize,
    n: usize,
    alpha: f64,
) -> Result<CheckReport> {
    let law = g_nu_law(l, nu, t)?;
    let gs = try_par_samples(seed, n, |rng| {
        sample_g_finite_horizon(rng, nu, l, t, cells, true).map(|s| s.g)
    })?;
    let emp = empirical(gs)?;
    let ks = ks_statistic(&emp, |u| law.cdf(u).unwrap_or(f64::NAN))?;
    Ok(CheckReport::ks(
        format!("last visit of {l} before {t} with drift {nu}, {cells} cells"),
        ks,
        alpha,
        seed,
    ))
}

/// KS at several resolutions on a fixed seed. Each resolution is gated on
/// its own; the ordering of the statistics is reported as a diagnostic.
#[allow(clippy::too_many_arguments)]
pub fn g_resolution_scan(
    seed: u64,
    nu: f64,
    l: f64,
    t: f64,
    cells: &[usize],
    n: usize,
    alpha: f64,
) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    let mut stats = Vec::new();
    for &c in cells {
        let r = g_law_check(seed, nu, l, t, c, n, alpha)?;
        stats.push(r.estimate);
        out.push(r);
    }
    let monotone = stats.windows(2).all(|w| w[1] <= w[0]);
    let worst_rise = stats.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    out.push(
        CheckReport::at_most(
            "KS statistic non-increasing under refinement",
            worst_rise,
            0.0,
        )
        .with_seed(seed, n)
        .with_note(format!("statistics {stats:?}, monotone = {monotone}"))
        .diagnostic(),
    );
    Ok(out)
}

/// Hit probability of `l` before `t`: bridge-corrected detection must exceed
/// sign-change detection on the same paths by k standard errors.
#[allow(clippy::too_many_arguments)]
pub fn hit_bias_check(
    seed: u64,
    nu: f64,
    l: f64,
    t: f64,
    cells: usize,
    n: usize,
    k: f64,
) -> Result<CheckReport> {
    ensure(t > 0.0 && cells > 0, || {
        format!("need t > 0 and cells > 0, got {t}, {cells}")
    })?;
    let h = t / cells as f64;
    let d = par_samples(seed, n, |rng| {
        let (mut x, mut corr, mut sign) = (0.0, false, false);
        for _ in 0..cells {
            let xn = x + nu * h + h.sqrt() * normal(rng);
            let (a, b) = (x - l, xn - l);
            sign |= a * b <= 0.0;
            corr |= uniform(rng) < crossing_prob(a, b, h);
            x = xn;
        }
        f64::from(u8::from(corr)) - f64::from(u8::from(sign))
    });
    Ok(CheckReport::at_least(
        format!("bridge correction raises hit rate of {l} ({cells} cells)"),
        0.0,
        McEstimate::from_samples(&d)?,
        k,
        true,
        seed,
    ))
}

/// Crossing of level 1 by the 0 → 0 bridge on [0, 1]: corrected frequency
/// against e^{−2}, and the corrected-minus-sign-change bias on common paths.
pub fn bridge_crossing_check(
    seed: u64,
    n: usize,
    cells: usize,
    k: f64,
) -> Result<Vec<CheckReport>> {
    ensure(cells > 0, || "need at least one cell".into())?;
    let times: Vec<f64> = (0..=cells).map(|i| i as f64 / cells as f64).collect();
    let rows = par_samples(seed, n, |rng| {
        let mut path = Vec::with_capacity(times.len());
        fill_bridge(rng, &times, 0.0, 0.0, &mut path);
        let (mut corr, mut sign) = (false, false);
        for i in 1..path.len() {
            let (a, b) = (path[i - 1] - 1.0, path[i] - 1.0);
            sign |= a * b <= 0.0;
            corr |= uniform(rng) < crossing_prob(a, b, times[i] - times[i - 1]);
        }
        (corr, sign)
    });
    let corr: Vec<bool> = rows.iter().map(|r| r.0).collect();
    let diff: Vec<f64> = rows
        .iter()
        .map(|&(c, s)| f64::from(u8::from(c)) - f64::from(u8::from(s)))
        .collect();
    Ok(vec![
        CheckReport::z_test(
            "bridge 0->0 on [0,1] reaches 1",
            (-2.0f64).exp(),
            McEstimate::from_bools(&corr)?,
            k,
            seed,
        ),
        CheckReport::at_least(
            "bridge correction beats sign-change detection",
            0.0,
            McEstimate::from_samples(&diff)?,
            k,
            true,
            seed,
        ),
    ])
}

/// P(no visit of l on (s, t) | endpoints) for the drifted path, by bridge
/// simulation with per-cell crossing draws, against the closed form.
#[allow(clippy::too_many_arguments)]
pub fn azema_conditional_check(
    seed: u64,
    s: f64,
    t: f64,
    x: f64,
    y: f64,
    lvl: DriftLevel,
    n: usize,
    cells: usize,
    k: f64,
) -> Result<CheckReport> {
    let analytic = sigma_pf(s, t, x, y, lvl)?;
    ensure(cells > 0, || "need at least one cell".into())?;
    let times: Vec<f64> = (0..=cells)
        .map(|i| s + (t - s) * i as f64 / cells as f64)
        .collect();
    // the bridge law does not depend on the drift, only the endpoints move
    let (a, b) = (x + lvl.nu * s - lvl.l, y + lvl.nu * t - lvl.l);
    let avoid = par_samples(seed, n, |rng| {
        let mut path = Vec::with_capacity(times.len());
        fill_bridge(rng, &times, a, b, &mut path);
        (1..path.len())
            .all(|i| uniform(rng) >= crossing_prob(path[i - 1], path[i], times[i] - times[i - 1]))
    });
    Ok(CheckReport::z_test(
        format!(
            "no visit of {} on ({s},{t}) given B_s={x}, B_t={y}, drift {}",
            lvl.l, lvl.nu
        ),
        analytic,
        McEstimate::from_bools(&avoid)?,
        k,
        seed,
    ))
}

/// 2S₁(S₁ − B₁) is Exp(1) and independent of B₁. S₁ is the exact maximum of
/// the piecewise bridge path on `cells` cells.
pub fn reflection_identity_check(
    seed: u64,
    n: usize,
    cells: usize,
    k: f64,
    alpha: f64,
) -> Result<Vec<CheckReport>> {
    ensure(cells > 0, || "need at least one cell".into())?;
    let h = 1.0 / cells as f64;
    let rows = par_samples(seed, n, |rng| {
        let (mut x, mut s) = (0.0f64, 0.0f64);
        for _ in 0..cells {
            let xn = x + h.sqrt() * normal(rng);
            let d = xn - x;
            s = s.max(0.5 * (x + xn + (d * d + 2.0 * h * exp1(rng)).sqrt()));
            x = xn;
        }
        (2.0 * s * (s - x), x)
    });
    let v: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let b: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let rho = spearman(&v, &b)?;
    let ks = ks_statistic(&empirical(v.clone())?, |z| {
        if z <= 0.0 {
            0.0
        } else {
            -(-z).exp_m1()
        }
    })?;
    Ok(vec![
        CheckReport::ks("2S(S-B) at time 1 ~ Exp(1)", ks, alpha, seed),
        CheckReport::z_test(
            "2S(S-B) at time 1 has mean 1",
            1.0,
            McEstimate::from_samples(&v)?,
            k,
            seed,
        ),
        CheckReport::at_most(
            "rank correlation of 2S(S-B) with B",
            rho.abs(),
            k / (n as f64).sqrt(),
        )
        .with_seed(seed, n),
    ])
}

fn censoring_rate(flags: impl Iterator<Item = bool>, n: usize) -> f64 {
    flags.filter(|&c| c).count() as f64 / n as f64
}

/// sup_u ℰ_u =law 1/U: KS of 1/sup against U(0,1) and two point checks.
pub fn doob_sup_check(
    seed: u64,
    n: usize,
    policy: HorizonPolicy,
    k: f64,
    alpha: f64,
) -> Result<Vec<CheckReport>> {
    let rows = try_par_samples(seed, n, |rng| sample_sup_gbm(rng, policy))?;
    let cens = censoring_rate(rows.iter().map(|r| r.1), n);
    let inv: Vec<f64> = rows.iter().map(|r| 1.0 / r.0).collect();
    let ge2: Vec<bool> = rows.iter().map(|r| r.0 >= 2.0).collect();
    let ge1: Vec<bool> = rows.iter().map(|r| r.0 >= 1.0).collect();
    let ks = ks_statistic(&empirical(inv)?, |u| u.clamp(0.0, 1.0))?;
    Ok(vec![
        CheckReport::ks("1/sup of exponential martingale ~ U(0,1)", ks, alpha, seed)
            .with_censoring(cens, CENSORING_LIMIT),
        CheckReport::z_test(
            "P(sup >= 2) = 1/2",
            0.5,
            McEstimate::from_bools(&ge2)?,
            k,
            seed,
        )
        .with_censoring(cens, CENSORING_LIMIT),
        CheckReport::abs_tol(
            "P(sup >= 1) = 1",
            1.0,
            McEstimate::from_bools(&ge1)?.mean,
            0.0,
        )
        .with_seed(seed, n),
    ])
}

/// E[(1 − ℰ_t/K)⁺] = P(𝒢_K ≤ t) on common paths, where 𝒢_K is the last
/// passage of ℰ at K, plus E[1{𝒢_K ≤ t}(K − ℰ_∞)⁺] against the
/// Black–Scholes put.
pub fn put_identity_check(
    seed: u64,
    k_strike: f64,
    t: f64,
    n: usize,
    policy: HorizonPolicy,
    k: f64,
) -> Result<Vec<CheckReport>> {
    ensure(k_strike > 0.0 && t > 0.0, || {
        format!("need K, t > 0, got {k_strike}, {t}")
    })?;
    let level = k_strike.ln();
    let rows = try_par_samples(seed, n, |rng| {
        sample_last_passage_transient(rng, 0.0, -0.5, level, policy, false, Some(t))
    })?;
    let cens = censoring_rate(rows.iter().map(|r| r.censored), n);
    let mut lhs = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    for r in &rows {
        let e_t = r.observed.expect("observation requested").exp();
        lhs.push((1.0 - e_t / k_strike).max(0.0));
        rhs.push(if r.g <= t { 1.0 } else { 0.0 });
    }
    let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let put = bs_put_gbm(t, k_strike)?;
    Ok(vec![
        CheckReport::z_test(
            format!("E[(1-E_t/K)+] = P(G_K <= t) at K={k_strike}, t={t}"),
            0.0,
            McEstimate::from_samples(&diff)?,
            k,
            seed,
        )
        .with_censoring(cens, CENSORING_LIMIT),
        CheckReport::z_test(
            format!("E[1(G_K <= t)(K-E_inf)+] = Black-Scholes put at K={k_strike}, t={t}"),
            put,
            McEstimate::from_samples(&rhs)?.scale(k_strike),
            k,
            seed,
        )
        .with_censoring(cens, CENSORING_LIMIT),
    ])
}

/// (K − 1)⁺ + ½E[L_t^K] against the Black–Scholes put at each (K, t),
/// with the local time from quadrature.
pub fn local_time_put_checks(points: &[(f64, f64)], tol: f64) -> Result<Vec<CheckReport>> {
    points
        .iter()
        .map(|&(strike, t)| {
            let lhs = (strike - 1.0).max(0.0) + 0.5 * expected_local_time_gbm(strike, t)?;
            Ok(CheckReport::abs_tol(
                format!("(K-1)+ + E[L_t^K]/2 = put at K={strike}, t={t}"),
                bs_put_gbm(t, strike)?,
                lhs,
                tol,
            ))
        })
        .collect()
}

/// Atom plus density mass of the last-visit law equals 1.
pub fn g_law_mass_check(l: f64, nu: f64, t: f64, tol: f64) -> Result<CheckReport> {
    let law = g_nu_law(l, nu, t)?;
    Ok(CheckReport::abs_tol(
        format!("total mass of the last-visit law of {l} before {t}, drift {nu}"),
        1.0,
        law.total_mass()?,
        tol,
    ))
}

/// G_a^{(ν)}, the last passage at a of B + νu, against the composition
/// T_a^{(ν)} + Ñ²/ν² with independent parts. For a = 0 it is compared with
/// the exact law of N²/ν².
#[allow(clippy::too_many_arguments)]
pub fn g_decomposition_check(
    seed: u64,
    a: f64,
    nu: f64,
    n: usize,
    policy: HorizonPolicy,
    k: f64,
    alpha: f64,
) -> Result<Vec<CheckReport>> {
    ensure(a >= 0.0 && nu > 0.0, || {
        format!("need a ≥ 0, ν > 0, got {a}, {nu}")
    })?;
    let policy = HorizonPolicy {
        step: policy.step.min(0.05 / (nu * nu)),
        ..policy
    };
    let rows = try_par_samples(seed, n, |rng| {
        sample_last_passage_transient(rng, 0.0, nu, a, policy, false, None)
    })?;
    let cens = censoring_rate(rows.iter().map(|r| r.censored), n);
    let path: Vec<f64> = rows.iter().map(|r| r.g).collect();
    if a == 0.0 {
        let ks = ks_statistic(&empirical(path)?, |x| {
            prob_abs_normal_le(nu * x.max(0.0).sqrt())
        })?;
        return Ok(vec![CheckReport::ks(
            format!("last zero of BM with drift {nu} ~ N^2/nu^2"),
            ks,
            alpha,
            seed,
        )
        .with_censoring(cens, CENSORING_LIMIT)]);
    }
    let m = 16 * n;
    let comp = try_par_samples(derive_seed(seed, "composition"), m, |rng| -> Result<f64> {
        let z = normal(rng);
        Ok(inverse_gaussian(rng, a / nu, a * a)? + z * z / (nu * nu))
    })?;
    let comp = empirical(comp)?;
    let ks = ks_two_sample(&empirical(path.clone())?, &comp)?;
    let med = comp.quantile(0.5);
    let below: Vec<bool> = path.iter().map(|&g| g <= med).collect();
    let half = McEstimate {
        mean: 0.5,
        std_error: 0.5 / (m as f64).sqrt(),
        n: m,
    };
    Ok(vec![
        CheckReport::ks(
            format!("last passage at {a} with drift {nu} ~ T + N^2/nu^2"),
            ks,
            alpha,
            seed,
        )
        .with_censoring(cens, CENSORING_LIMIT),
        CheckReport::z_test(
            format!("path mass below composition median, a={a}, drift {nu}"),
            0.0,
            McEstimate::from_bools(&below)?.minus(&half),
            k,
            seed,
        )
        .with_censoring(cens, CENSORING_LIMIT),
    ])
}

/// Which positive local martingale from 1 the last passage refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GkFlavor {
    /// Brownian motion from 1 killed at 0, 0 < K < 1.
    KilledBm,
    /// 1/R with R a BES(3) from 1, 0 < K ≤ 1.
    InverseBes3,
}

/// Path-sampled G_K against U_K²/N² (two-sample KS) and its Laplace
/// functional at λ = 1 against the closed form.
pub fn note2_gk_law_check(
    seed: u64,
    k_level: f64,
    flavor: GkFlavor,
    n: usize,
    k: f64,
    alpha: f64,
) -> Result<Vec<CheckReport>> {
    let (lo, hi, name) = match flavor {
        GkFlavor::KilledBm => (1.0 - k_level, 1.0 + k_level, "killed BM"),
        GkFlavor::InverseBes3 => (1.0 / k_level - 1.0, 1.0 / k_level + 1.0, "inverse BES(3)"),
    };
    let path = try_par_samples(seed, n, |rng| match flavor {
        GkFlavor::KilledBm => sample_gk_killed_bm(rng, k_level),
        GkFlavor::InverseBes3 => sample_gk_inv_bes3(rng, k_level),
    })?;
    let oracle = par_samples(derive_seed(seed, "uniform-over-normal"), n, |rng| {
        let u = lo + (hi - lo) * rng.random::<f64>();
        let z = normal(rng);
        u * u / (z * z)
    });
    let ks = ks_two_sample(&empirical(path.clone())?, &empirical(oracle)?)?;
    let laplace = match flavor {
        GkFlavor::KilledBm => laplace_gk_killed_bm(1.0, k_level)?,
        GkFlavor::InverseBes3 => laplace_gk_inv_bes3(1.0, k_level)?,
    };
    Ok(vec![
        CheckReport::ks(
            format!("{name} last passage at {k_level} ~ U^2/N^2"),
            ks,
            alpha,
            seed,
        ),
        CheckReport::z_test(
            format!("{name} E[exp(-G/2)] at K={k_level}"),
            laplace,
            McEstimate::of(&path, |g| (-0.5 * g).exp())?,
            k,
            seed,
        ),
    ])
}

/// Within one of `buckets` equal-width bins of g = last visit of 1 by ℰ
/// before t, the mean of f(ℰ_t) against the closed-form conditional
/// expectation evaluated at each sample's own λ = √(t − g).
#[allow(clippy::too_many_arguments)]
pub fn conditional_given_g_check<F>(
    seed: u64,
    label: &str,
    t: f64,
    buckets: usize,
    bucket: usize,
    f: F,
    n: usize,
    cells: usize,
    k: f64,
) -> Result<CheckReport>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    ensure(t > 0.0 && bucket < buckets, || {
        format!("need t > 0 and bucket < {buckets}")
    })?;
    let rows = try_par_samples(seed, n, |rng| {
        finite_horizon_with_end(rng, -0.5, 0.0, t, cells, true)
    })?;
    let (lo, hi) = (
        t * bucket as f64 / buckets as f64,
        t * (bucket + 1) as f64 / buckets as f64,
    );
    let inside: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(s, _)| s.hit_any && s.g > lo && s.g <= hi)
        .map(|(s, x)| (s.g, *x))
        .collect();
    let name = format!("E[f(E_t) | g] for {label}, g in ({lo:.3},{hi:.3}]");
    if inside.len() < 2 {
        return Ok(CheckReport::abs_tol(name, 0.0, 0.0, 0.0)
            .with_seed(seed, n)
            .with_note("empty bucket skipped")
            .diagnostic());
    }
    let mut diffs = Vec::with_capacity(inside.len());
    for &(g, x) in &inside {
        let analytic = conditional_given_g((t - g).max(0.0).sqrt(), &f)?;
        diffs.push(f(x.exp()) - analytic);
    }
    Ok(
        CheckReport::z_test(name, 0.0, McEstimate::from_samples(&diffs)?, k, seed)
            .with_note(format!("{} of {n} samples in bucket", inside.len())),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arcsine_law_small() {
        let r = g_law_check(1, 0.0, 0.0, 1.0, 64, 4000, 0.01).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn straddling_endpoints_never_avoid() {
        let r = azema_conditional_check(
            2,
            1.0,
            2.0,
            1.0,
            -1.0,
            DriftLevel::new(0.0, 0.0),
            500,
            16,
            3.0,
        )
        .unwrap();
        assert_eq!(r.estimate, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn constant_function_is_exact() {
        let r = conditional_given_g_check(3, "f=1", 1.0, 20, 10, |_| 1.0, 2000, 64, 3.0).unwrap();
        assert!(r.pass && r.estimate.abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn sup_check_small() {
        for r in doob_sup_check(4, 4000, HorizonPolicy::default(), 3.0, 0.01).unwrap() {
            assert!(r.pass, "{r:?}");
        }
    }
}
