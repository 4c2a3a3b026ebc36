//! The inverse BES(3) strict local martingale M = 1/X, X a BES(3) from 1:
//! its call r(t), the put/call asymmetry and the Madan–Yor correction.

use rand::Rng;
use serde::Serialize;

use crate::closed_forms::{r_integral, r_laplace, r_of_t, rtilde_laplace};
use crate::error::{ensure, Result};
use crate::last_passage::{sample_last_passage_transient, HorizonPolicy};
use crate::mc::{par_samples, try_par_samples};
use crate::quad::{integrate, integrate_to_infinity, QuadOptions};
use crate::report::CheckReport;
use crate::samplers::{normal, uniform};
use crate::special::{norm_cdf, norm_pdf, prob_abs_normal_le};
use crate::stats::{ks_statistic, EmpiricalDistribution, McEstimate};

/// M_t = 1/X_t with X a BES(3) started at 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct InvBes3Model;

impl InvBes3Model {
    /// Draws M_t exactly through the norm of a 3-d Gaussian.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, t: f64) -> f64 {
        self.sample_from(t, [normal(rng), normal(rng), normal(rng)])
    }

    /// M_t driven by given standard normals, for common random numbers.
    pub fn sample_from(&self, t: f64, z: [f64; 3]) -> f64 {
        let s = t.sqrt();
        let x = 1.0 + s * z[0];
        let (y, w) = (s * z[1], s * z[2]);
        1.0 / (x * x + y * y + w * w).sqrt()
    }

    /// E\[M_t\] = P(|N| ≤ 1/√t).
    pub fn mean(&self, t: f64) -> f64 {
        prob_abs_normal_le(1.0 / t.sqrt())
    }

    /// Madan–Yor correction c(t) = 1 − E\[M_t\].
    pub fn defect(&self, t: f64) -> f64 {
        2.0 * (1.0 - norm_cdf(1.0 / t.sqrt()))
    }
}

/// MC of E[(M_t − 1)⁺] against r(t).
pub fn call_one_check(seed: u64, t: f64, n: usize, k: f64) -> Result<CheckReport> {
    ensure(t > 0.0, || format!("t must be positive, got {t}"))?;
    let m = InvBes3Model;
    let v = par_samples(seed, n, |rng| (m.sample(rng, t) - 1.0).max(0.0));
    Ok(CheckReport::z_test(
        format!("E[(1/X_t - 1)+] = r(t) at t={t}"),
        r_of_t(t)?,
        McEstimate::from_samples(&v)?,
        k,
        seed,
    ))
}

/// Small- and large-time behaviour of r: √(2π/t)·r(t) → 1 and
/// t^{3/2}·r(t) → √(2/π)/6.
pub fn r_asymptotic_checks() -> Result<Vec<CheckReport>> {
    let small =
        |t: f64| -> Result<f64> { Ok((2.0 * std::f64::consts::PI / t).sqrt() * r_of_t(t)?) };
    let large = (2.0 / std::f64::consts::PI).sqrt() / 6.0;
    Ok(vec![
        CheckReport::rel_tol("sqrt(2pi/t) r(t) at t=1e-4", 1.0, small(1e-4)?, 0.02),
        CheckReport::rel_tol("sqrt(2pi/t) r(t) at t=1e-3", 1.0, small(1e-3)?, 0.05),
        CheckReport::rel_tol(
            "t^1.5 r(t) at t=400",
            large,
            400f64.powf(1.5) * r_of_t(400.0)?,
            0.05,
        ),
    ])
}

/// E_U[P(|N| ≤ U/√t)] for U uniform on [0, 2], in closed form.
fn uniform_mixture_prob(t: f64) -> f64 {
    let a = 2.0 / t.sqrt();
    // ∫₀^a P(|N| ≤ v) dv = a(2Φ(a) − 1) + 2φ(a) − 2φ(0)
    let integral = a * prob_abs_normal_le(a) + 2.0 * (norm_pdf(a) - norm_pdf(0.0));
    integral / a
}

/// r(t) = P(|N| ≤ 1/√t) − P(|N| ≤ U/√t): sampled with a shared N, and the
/// closed-form mixture against r_of_t.
pub fn r_via_times_check(seed: u64, t: f64, n: usize, k: f64) -> Result<Vec<CheckReport>> {
    ensure(t > 0.0, || format!("t must be positive, got {t}"))?;
    let st = t.sqrt();
    let d = par_samples(seed, n, |rng| {
        let z = normal(rng).abs();
        let u = 2.0 * uniform(rng);
        f64::from(u8::from(z <= 1.0 / st)) - f64::from(u8::from(z <= u / st))
    });
    let r = r_of_t(t)?;
    Ok(vec![
        CheckReport::z_test(
            format!("r(t) from hitting-time representation at t={t}"),
            r,
            McEstimate::from_samples(&d)?,
            k,
            seed,
        ),
        CheckReport::abs_tol(
            format!("r(t) from uniform mixture at t={t}"),
            r,
            prob_abs_normal_le(1.0 / st) - uniform_mixture_prob(t),
            1e-8,
        ),
    ])
}

/// Two times with t₁ < t₂ and r(t₁) > r(t₂), plus the scanned maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub t1: f64,
    pub r1: f64,
    pub t2: f64,
    pub r2: f64,
    pub t_max: f64,
    pub r_max: f64,
}

/// Scans r on a log grid over [1e-4, 400] and returns a decreasing pair
/// just after the maximum.
pub fn not_increasing_witness() -> Result<Witness> {
    let pts = 4001;
    let (lo, hi) = (1e-4f64.ln(), 400f64.ln());
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..pts {
        let t = (lo + (hi - lo) * i as f64 / (pts - 1) as f64).exp();
        let r = r_of_t(t)?;
        if r > best.1 {
            best = (t, r);
        }
    }
    let t2 = 4.0 * best.0;
    Ok(Witness {
        t1: best.0,
        r1: best.1,
        t2,
        r2: r_of_t(t2)?,
        t_max: best.0,
        r_max: best.1,
    })
}

/// Checks on the witness: r rises from ~0, peaks and decays again.
pub fn witness_checks() -> Result<Vec<CheckReport>> {
    let w = not_increasing_witness()?;
    let note = format!("max of r near t={:.4}, r={:.6}", w.t_max, w.r_max);
    Ok(vec![
        CheckReport::at_most(format!("r({:.4}) < r({:.4})", w.t2, w.t1), w.r2 - w.r1, 0.0)
            .with_note(note.clone()),
        CheckReport::at_most("r(1e-4) below scanned max", r_of_t(1e-4)? - w.r_max, 0.0),
        CheckReport::at_most("r(400) below scanned max", r_of_t(400.0)? - w.r_max, 0.0),
    ])
}

/// The Madan–Yor correction c(t) three ways: 1 − E\[M_t\] against the
/// closed form, call − put = (1 − K) − c for each strike on common paths, and σP(sup_{u≤t} M_u ≥ σ) at
/// σ ∈ {20, 40, 80} with Richardson extrapolation 2v(80) − v(40).
///
/// The supremum event is {X reaches 1/σ by t}. X reaches 1/σ with
/// probability 1/σ and, given that, runs as a Brownian motion until then,
/// so it is sampled as a coin flip and a first-passage time (`n_sup` draws).
pub fn madan_yor_check(
    seed: u64,
    t: f64,
    strikes: &[f64],
    n: usize,
    n_sup: usize,
    k: f64,
) -> Result<Vec<CheckReport>> {
    ensure(t > 0.0, || format!("t must be positive, got {t}"))?;
    ensure(strikes.iter().all(|&s| s > 0.0), || {
        "strikes must be positive".into()
    })?;
    let model = InvBes3Model;
    let c = model.defect(t);
    let ms = par_samples(seed, n, |rng| model.sample(rng, t));
    let c_mc = McEstimate::of(&ms, |m| 1.0 - m)?;
    let mut out = vec![CheckReport::z_test(
        format!("c(t) = 1 - E[M_t] at t={t}"),
        c,
        c_mc,
        k,
        seed,
    )];
    for &strike in strikes {
        let cp = McEstimate::of(&ms, |m| (m - strike).max(0.0) - (strike - m).max(0.0))?;
        out.push(CheckReport::z_test(
            format!("call - put = (1-K) - c(t) at K={strike}, t={t}"),
            (1.0 - strike) - c,
            cp,
            k,
            seed,
        ));
    }
    let sigmas = [20.0, 40.0, 80.0];
    let sup_seed = crate::rng::derive_seed(seed, "sup");
    let rows = par_samples(sup_seed, n_sup, |rng| {
        let u = uniform(rng);
        let z = normal(rng);
        sigmas.map(|s: f64| {
            let a = 1.0 / s;
            let reached = u < a && (1.0 - a) * (1.0 - a) <= t * z * z;
            if reached {
                s
            } else {
                0.0
            }
        })
    });
    let v: Vec<McEstimate> = (0..3)
        .map(|j| McEstimate::from_samples(&rows.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let rich =
        McEstimate::from_samples(&rows.iter().map(|r| 2.0 * r[2] - r[1]).collect::<Vec<_>>())?;
    let gaps: Vec<f64> = v.iter().map(|e| (e.mean - c_mc.mean).abs()).collect();
    let converging = gaps.windows(2).all(|w| w[1] <= w[0]);
    let mut tail = CheckReport::rel_tol(
        format!("sigma P(sup M >= sigma) at sigma=80 vs c(t), t={t}"),
        c_mc.mean,
        v[2].mean,
        0.1,
    )
    .with_seed(sup_seed, n_sup)
    .with_note(format!(
        "v(20)={:.5} v(40)={:.5} v(80)={:.5}, se(80)={:.1e}",
        v[0].mean, v[1].mean, v[2].mean, v[2].std_error
    ));
    if !converging {
        tail = tail.with_note("slow limit: sigma sequence not monotone-converging");
    }
    out.push(tail);
    out.push(CheckReport::z_test(
        format!("Richardson 2v(80)-v(40) = c(t) at t={t}"),
        c,
        rich,
        k,
        sup_seed,
    ));
    Ok(out)
}

/// Quadratic-variation form of c(t) as a diagnostic: √(π/2)·q·P(√⟨M⟩_t ≥ q) with
/// ⟨M⟩_t = ∫ M⁴ du accumulated on a grid. Heavy tails make this slow to
/// converge, so it never gates.
pub fn quadratic_variation_diagnostic(
    seed: u64,
    t: f64,
    n: usize,
    cells: usize,
) -> Result<Vec<CheckReport>> {
    ensure(t > 0.0 && cells > 0, || {
        format!("need t > 0 and cells > 0, got {t}, {cells}")
    })?;
    let h = t / cells as f64;
    let qv = par_samples(seed, n, |rng| {
        let mut p = [1.0f64, 0.0, 0.0];
        let mut acc = 0.0;
        let mut m_prev: f64 = 1.0;
        for _ in 0..cells {
            for c in &mut p {
                *c += h.sqrt() * normal(rng);
            }
            let m = 1.0 / (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            acc += 0.5 * h * (m_prev.powi(4) + m.powi(4));
            m_prev = m;
        }
        acc.sqrt()
    });
    let c = InvBes3Model.defect(t);
    let factor = (std::f64::consts::PI / 2.0).sqrt();
    [5.0, 10.0, 20.0]
        .iter()
        .map(|&q| {
            let est = McEstimate::of(&qv, |v| if v >= q { factor * q } else { 0.0 })?;
            Ok(CheckReport::z_test(
                format!("sqrt(pi/2) q P(sqrt<M>_t >= q) at q={q}, t={t}"),
                c,
                est,
                3.0,
                seed,
            )
            .diagnostic())
        })
        .collect()
}

/// For ℰ = exp(B − u/2): E[(ℰ_t − 1)⁺] = P(4N² ≤ t), and the last zero of
/// B ∓ u/2 is 4N² under both drifts.
pub fn prop9_1_checks(
    seed: u64,
    t: f64,
    n: usize,
    policy: HorizonPolicy,
    k: f64,
    alpha: f64,
) -> Result<Vec<CheckReport>> {
    ensure(t > 0.0, || format!("t must be positive, got {t}"))?;
    let target = prob_abs_normal_le(t.sqrt() / 2.0);
    let calls = par_samples(seed, n, |rng| {
        ((t.sqrt() * normal(rng) - 0.5 * t).exp() - 1.0).max(0.0)
    });
    let mut out = vec![CheckReport::z_test(
        format!("E[(E_t - 1)+] = P(4N^2 <= t) at t={t}"),
        target,
        McEstimate::from_samples(&calls)?,
        k,
        seed,
    )];
    for mu in [-0.5, 0.5] {
        let s = crate::rng::derive_seed(seed, if mu < 0.0 { "down" } else { "up" });
        let rows = try_par_samples(s, n, |rng| {
            sample_last_passage_transient(rng, 0.0, mu, 0.0, policy, false, None)
        })?;
        let cens = rows.iter().filter(|r| r.censored).count() as f64 / n as f64;
        let gs: Vec<f64> = rows.iter().map(|r| r.g).collect();
        let below: Vec<bool> = gs.iter().map(|&g| g <= t).collect();
        let ks = ks_statistic(&EmpiricalDistribution::new(gs)?, |x| {
            prob_abs_normal_le(x.max(0.0).sqrt() / 2.0)
        })?;
        out.push(
            CheckReport::ks(format!("last zero of B{mu:+}u ~ 4N^2"), ks, alpha, s)
                .with_censoring(cens, 1e-3),
        );
        out.push(
            CheckReport::z_test(
                format!("P(g <= t) = P(4N^2 <= t), drift {mu:+}, t={t}"),
                target,
                McEstimate::from_bools(&below)?,
                k,
                s,
            )
            .with_censoring(cens, 1e-3),
        );
    }
    Ok(out)
}

/// Deterministic facts about r and R̃ (density 3r): total mass, Laplace
/// transforms against quadrature, and the moment boundary α < 1/2.
pub fn rtilde_checks() -> Result<Vec<CheckReport>> {
    let opts = QuadOptions::with_abs_tol(1e-12);
    let laplace_quad = |lambda: f64| -> Result<f64> {
        Ok(integrate_to_infinity(
            |t| {
                if t > 0.0 {
                    (-lambda * t).exp() * r_of_t(t).unwrap_or(0.0)
                } else {
                    0.0
                }
            },
            0.0,
            opts,
        )?
        .value)
    };
    let mut out = vec![CheckReport::abs_tol(
        "integral of r = 1/3",
        1.0 / 3.0,
        r_integral()?,
        1e-4,
    )];
    out.push(
        CheckReport::abs_tol(
            "r_laplace(1/2) vs quadrature",
            0.5 * laplace_quad(0.5)?,
            r_laplace(0.5)?,
            1e-5,
        )
        .with_note(format!("closed form gives {:.7}", r_laplace(0.5)?)),
    );
    for lambda in [0.5, 1.0, 2.0] {
        out.push(CheckReport::abs_tol(
            format!("Laplace transform of 3r at {lambda}"),
            3.0 * laplace_quad(lambda)?,
            rtilde_laplace(lambda)?,
            1e-5,
        ));
    }
    // decade increments of ∫ t^α r dt shrink by 10^{α−1/2}
    for alpha in [0.4, 0.6] {
        let inc = |j: i32| -> Result<f64> {
            let (a, b) = (10f64.powi(j), 10f64.powi(j + 1));
            Ok(integrate(|t| t.powf(alpha) * r_of_t(t).unwrap_or(0.0), a, b, opts)?.value)
        };
        let ratio = inc(5)? / inc(4)?;
        let expected = 10f64.powf(alpha - 0.5);
        let verdict = if ratio < 1.0 {
            "converging"
        } else {
            "diverging"
        };
        out.push(
            CheckReport::rel_tol(
                format!("decade ratio of int t^{alpha} r(t) dt"),
                expected,
                ratio,
                0.02,
            )
            .with_note(verdict)
            .require(
                (ratio < 1.0) == (alpha < 0.5),
                "moment boundary on the wrong side",
            ),
        );
    }
    Ok(out)
}

/// Put E\[(K − M_t)⁺\] non-decreasing and E\[M_t\] strictly decreasing along
/// `times`, on common random numbers.
pub fn monotonicity_checks(
    seed: u64,
    times: &[f64],
    strike: f64,
    n: usize,
    k: f64,
) -> Result<Vec<CheckReport>> {
    ensure(times.windows(2).all(|w| 0.0 < w[0] && w[0] < w[1]), || {
        "times must increase".into()
    })?;
    let model = InvBes3Model;
    let zs = par_samples(seed, n, |rng| [normal(rng), normal(rng), normal(rng)]);
    let mut out = Vec::new();
    for w in times.windows(2) {
        let m: Vec<(f64, f64)> = zs
            .iter()
            .map(|&z| (model.sample_from(w[0], z), model.sample_from(w[1], z)))
            .collect();
        let put = m
            .iter()
            .map(|&(a, b)| (strike - b).max(0.0) - (strike - a).max(0.0))
            .collect::<Vec<_>>();
        let mean = m.iter().map(|&(a, b)| a - b).collect::<Vec<_>>();
        out.push(CheckReport::at_least(
            format!(
                "put at K={strike} non-decreasing from t={} to t={}",
                w[0], w[1]
            ),
            0.0,
            McEstimate::from_samples(&put)?,
            k,
            false,
            seed,
        ));
        out.push(CheckReport::at_least(
            format!("E[M_t] decreasing from t={} to t={}", w[0], w[1]),
            0.0,
            McEstimate::from_samples(&mean)?,
            k,
            true,
            seed,
        ));
    }
    Ok(out)
}

/// One row of the ρ/r table: u, ρ(u), and t = 1/u² with r(t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoPoint {
    pub u: f64,
    pub rho: f64,
    pub t: f64,
    pub r: f64,
}

/// `points` log-spaced times in [t_min, t_max] with the matching ρ and r.
pub fn rho_curve(t_min: f64, t_max: f64, points: usize) -> Result<Vec<RhoPoint>> {
    ensure(0.0 < t_min && t_min < t_max && points >= 2, || {
        format!("need 0 < t_min < t_max and at least 2 points, got {t_min}, {t_max}, {points}")
    })?;
    let (lo, hi) = (t_min.ln(), t_max.ln());
    (0..points)
        .map(|i| {
            let t = (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp();
            let u = 1.0 / t.sqrt();
            Ok(RhoPoint {
                u,
                rho: crate::closed_forms::rho(u)?,
                t,
                r: r_of_t(t)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixture_matches_r() {
        for t in [0.1f64, 1.0, 7.0] {
            let v = prob_abs_normal_le(1.0 / t.sqrt()) - uniform_mixture_prob(t);
            assert!((v - r_of_t(t).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn defect_at_one() {
        assert!((InvBes3Model.defect(1.0) - 0.317311).abs() < 1e-6);
        assert!((InvBes3Model.mean(1.0) + InvBes3Model.defect(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn witness_is_decreasing() {
        let w = not_increasing_witness().unwrap();
        assert!(w.t1 < w.t2 && w.r1 > w.r2);
        assert!(w.t_max > 0.01 && w.t_max < 10.0);
    }

    #[test]
    fn curve_shape() {
        let c = rho_curve(1e-4, 400.0, 200).unwrap();
        assert_eq!(c.len(), 200);
        assert!(c[0].r < 0.01 && c[199].r < 0.01);
        let slopes: Vec<f64> = c.windows(2).map(|w| w[1].r - w[0].r).collect();
        let changes = slopes
            .windows(2)
            .filter(|s| (s[0] > 0.0) != (s[1] > 0.0))
            .count();
        assert_eq!(changes, 1);
    }

    #[test]
    fn deterministic_checks_pass() {
        for r in r_asymptotic_checks()
            .unwrap()
            .into_iter()
            .chain(rtilde_checks().unwrap())
            .chain(witness_checks().unwrap())
        {
            assert!(r.pass, "{r:?}");
        }
    }
}
