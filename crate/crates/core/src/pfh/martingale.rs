//! Monte Carlo tests of the past-future martingale property.

use crate::error::{ensure, Result};
use crate::mc::par_samples;
use crate::paths::{sample_pf_interior_pair, simulate_gamma_process};
use crate::report::CheckReport;
use crate::samplers::{beta, normal};
use crate::stats::{ks_two_sample, spearman, EmpiricalDistribution, McEstimate};
use crate::TimeGrid;

/// Times s' < s < t < t' < horizon for the pairing test. The past test
/// function sees B_{s'}; the future one sees (B_{t'}, B_horizon).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingSetup {
    pub s_out: f64,
    pub s: f64,
    pub t: f64,
    pub t_out: f64,
    pub horizon: f64,
}

impl PairingSetup {
    pub fn new(s_out: f64, s: f64, t: f64, t_out: f64) -> Self {
        Self {
            s_out,
            s,
            t,
            t_out,
            horizon: t_out + 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        ensure(
            0.0 < self.s_out
                && self.s_out < self.s
                && self.s < self.t
                && self.t < self.t_out
                && self.t_out < self.horizon,
            || format!("need 0 < s' < s < t < t' < T, got {self:?}"),
        )
    }
}

/// Share of Σd² carried by the largest single term; values near 1 signal a
/// sample dominated by one draw, i.e. an infinite-variance integrand.
fn top_share(d: &[f64]) -> f64 {
    let ss: f64 = d.iter().map(|v| v * v).sum();
    let mx = d.iter().map(|v| v * v).fold(0.0, f64::max);
    if ss > 0.0 {
        mx / ss
    } else {
        0.0
    }
}

/// Compares E[φ·M_{s,t}·ψ] with E[φ·M_{s',t'}·ψ] on common paths.
///
/// With `submartingale = false` the paired difference must be within k
/// standard errors of 0. With `submartingale = true` it must exceed 0 by
/// k standard errors (φ, ψ ≥ 0 assumed). The test fails when a single draw
/// carries more than a quarter of the sum of squares.
#[allow(clippy::too_many_arguments)]
pub fn pairing_martingale_test<M, P, Q>(
    label: &str,
    seed: u64,
    m: M,
    setup: PairingSetup,
    phi: P,
    psi: Q,
    n: usize,
    k: f64,
    submartingale: bool,
) -> Result<CheckReport>
where
    M: Fn(f64, f64, f64, f64) -> f64 + Sync + Send,
    P: Fn(f64) -> f64 + Sync + Send,
    Q: Fn(f64, f64) -> f64 + Sync + Send,
{
    setup.validate()?;
    let PairingSetup {
        s_out,
        s,
        t,
        t_out,
        horizon,
    } = setup;
    let times = [s_out, s, t, t_out, horizon];
    let diffs = par_samples(seed, n, |rng| {
        let mut b = [0.0; 5];
        let mut prev_t = 0.0;
        let mut prev_b = 0.0;
        for (i, &u) in times.iter().enumerate() {
            prev_b += (u - prev_t).sqrt() * normal(rng);
            prev_t = u;
            b[i] = prev_b;
        }
        let w = phi(b[0]) * psi(b[3], b[4]);
        w * (m(s, t, b[1], b[2]) - m(s_out, t_out, b[0], b[3]))
    });
    let est = McEstimate::from_samples(&diffs)?;
    let share = top_share(&diffs);
    let rep = if submartingale {
        CheckReport::at_least(label, 0.0, est, k, true, seed)
    } else {
        CheckReport::z_test(label, 0.0, est, k, seed)
    };
    Ok(rep
        .with_note(format!(
            "largest draw carries {share:.3} of the sum of squares"
        ))
        .require(
            share <= 0.25 && est.std_error.is_finite(),
            "heavy-tailed integrand: one draw dominates",
        ))
}

/// Draws (B_s, B_t) given B_{s'} = x, B_{t'} = y and compares the mean of
/// h(s,t;B_s,B_t) with h(s',t';x,y). With `submartingale` the mean must
/// exceed the outer value by k standard errors.
#[allow(clippy::too_many_arguments)]
pub fn conditional_martingale_test<H>(
    label: &str,
    seed: u64,
    h: H,
    (s_out, t_out, x, y): (f64, f64, f64, f64),
    (s, t): (f64, f64),
    n: usize,
    k: f64,
    submartingale: bool,
) -> Result<CheckReport>
where
    H: Fn(f64, f64, f64, f64) -> f64 + Sync + Send,
{
    ensure(s_out < s && s < t && t < t_out, || {
        format!("need s' < s < t < t', got {s_out}, {s}, {t}, {t_out}")
    })?;
    let vals = par_samples(seed, n, |rng| {
        let (bs, bt) =
            sample_pf_interior_pair(rng, s_out, t_out, x, y, s, t).expect("validated ordering");
        h(s, t, bs, bt)
    });
    let est = McEstimate::from_samples(&vals)?;
    let outer = h(s_out, t_out, x, y);
    let share = top_share(&vals.iter().map(|v| v - est.mean).collect::<Vec<_>>());
    let rep = if submartingale {
        CheckReport::at_least(label, outer, est, k, true, seed)
    } else {
        CheckReport::z_test(label, outer, est, k, seed)
    };
    Ok(rep.require(
        share <= 0.25 && est.std_error.is_finite(),
        "heavy-tailed integrand: one draw dominates",
    ))
}

/// Gamma-process harness: (γ_t−γ_s)/(γ_{t'}−γ_{s'}) is Beta(t−s, (t'−s')−(t−s))
/// and independent of (γ_{s'}, γ_{t'}−γ_{s'}). Also checks that the unit
/// increment is Exp(1).
pub fn gamma_harness_check(
    seed: u64,
    n: usize,
    (s_out, s, t, t_out): (f64, f64, f64, f64),
    k: f64,
    alpha: f64,
) -> Result<Vec<CheckReport>> {
    ensure(0.0 < s_out && s_out < s && s < t && t < t_out, || {
        format!("need 0 < s' < s < t < t', got {s_out}, {s}, {t}, {t_out}")
    })?;
    let grid = TimeGrid::new(vec![0.0, s_out, s, t, t_out])?;
    let rows = crate::mc::try_par_samples(seed, n, |rng| -> Result<[f64; 4]> {
        let p = simulate_gamma_process(rng, &grid)?;
        let v = &p.values;
        let ratio = (v[3] - v[2]) / (v[4] - v[1]);
        let b = beta(rng, t - s, (t_out - s_out) - (t - s))?;
        Ok([ratio, v[1], v[4] - v[1], b])
    })?;
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<f64>>();
    let (ratio, past, span, direct) = (col(0), col(1), col(2), col(3));
    let ks = ks_two_sample(
        &EmpiricalDistribution::new(ratio.clone())?,
        &EmpiricalDistribution::new(direct)?,
    )?;
    let bound = k / (n as f64).sqrt();
    let r1 = spearman(&ratio, &past)?;
    let r2 = spearman(&ratio, &span)?;
    let unit = crate::mc::try_par_samples(crate::rng::derive_seed(seed, "unit"), n, |rng| {
        crate::samplers::gamma(rng, 1.0)
    })?;
    let unit_ks = crate::stats::ks_statistic(&EmpiricalDistribution::new(unit)?, |x| {
        if x <= 0.0 {
            0.0
        } else {
            -(-x).exp_m1()
        }
    })?;
    Ok(vec![
        CheckReport::ks(
            "gamma increment over unit time ~ Exp(1)",
            unit_ks,
            alpha,
            seed,
        ),
        CheckReport::ks("gamma ratio ~ Beta (two-sample)", ks, alpha, seed),
        CheckReport::at_most("gamma ratio rank-corr with past value", r1.abs(), bound)
            .with_seed(seed, n),
        CheckReport::at_most(
            "gamma ratio rank-corr with outer increment",
            r2.abs(),
            bound,
        )
        .with_seed(seed, n),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::{h_pfh_harness, sigma_pf, DriftLevel};

    #[test]
    fn harness_pairs() {
        let setup = PairingSetup::new(0.5, 1.0, 2.0, 3.0);
        let r = pairing_martingale_test(
            "harness",
            1,
            |s, t, x, y| h_pfh_harness(s, t, x, y, 1.0).unwrap(),
            setup,
            |b| b.cos(),
            |b, c| (c - b).cos() + b.cos(),
            20_000,
            3.0,
            false,
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn survival_is_submartingale() {
        let z = DriftLevel::new(0.0, 0.0);
        let r = conditional_martingale_test(
            "sigma",
            2,
            |s, t, x, y| sigma_pf(s, t, x, y, z).unwrap(),
            (0.5, 3.0, 1.0, 1.0),
            (1.0, 2.0),
            20_000,
            5.0,
            true,
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn bad_ordering_rejected() {
        let setup = PairingSetup::new(1.0, 0.5, 2.0, 3.0);
        assert!(pairing_martingale_test(
            "x",
            1,
            |_, _, _, _| 1.0,
            setup,
            |_| 1.0,
            |_, _| 1.0,
            10,
            3.0,
            false
        )
        .is_err());
    }

    #[test]
    fn top_share_detects_domination() {
        assert!(top_share(&[1.0, 1.0, 1.0, 100.0]) > 0.99);
        assert!(top_share(&[1.0; 100]) < 0.02);
    }
}
