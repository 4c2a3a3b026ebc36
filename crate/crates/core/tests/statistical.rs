//! Fixed-seed statistical properties of the samplers and estimators.

use pflab::asian::{a_n_mc, a_n_quadrature};
use pflab::last_passage as lp;
use pflab::levy::{self, LevyModel};
use pflab::mc::{par_samples, try_par_samples};
use pflab::paths::{sample_bridge_point, sample_pf_interior_pair, simulate_bm_path};
use pflab::pfh::gamma_harness_check;
use pflab::stats::{ks_two_sample, skew_kurtosis};
use pflab::strict_local::monotonicity_checks;
use pflab::{derive_seed, CheckReport, EmpiricalDistribution, TimeGrid};

fn seed(tag: &str) -> u64 {
    derive_seed(2024, tag)
}

fn assert_all_pass(reports: &[CheckReport]) {
    let bad: Vec<String> = reports
        .iter()
        .filter(|r| r.failed())
        .map(|r| r.summary_line())
        .collect();
    assert!(bad.is_empty(), "failed checks:\n{}", bad.join("\n"));
}

#[test]
fn interior_pair_marginals_match_bridge_points() {
    let (s_out, t_out, x, y, s, t) = (0.5, 3.0, 0.4, -0.7, 1.0, 2.2);
    let n = 100_000;
    let pairs = try_par_samples(seed("pair"), n, |rng| {
        sample_pf_interior_pair(rng, s_out, t_out, x, y, s, t)
    })
    .unwrap();
    let at_s = try_par_samples(seed("point-s"), n, |rng| {
        sample_bridge_point(rng, s_out, t_out, x, y, s)
    })
    .unwrap();
    let at_t = try_par_samples(seed("point-t"), n, |rng| {
        sample_bridge_point(rng, s_out, t_out, x, y, t)
    })
    .unwrap();
    let emp = |v: Vec<f64>| EmpiricalDistribution::new(v).unwrap();
    let ks_s = ks_two_sample(&emp(pairs.iter().map(|p| p.0).collect()), &emp(at_s)).unwrap();
    let ks_t = ks_two_sample(&emp(pairs.iter().map(|p| p.1).collect()), &emp(at_t)).unwrap();
    assert!(ks_s.p_value > 0.01, "B_s marginal p = {}", ks_s.p_value);
    assert!(ks_t.p_value > 0.01, "B_t marginal p = {}", ks_t.p_value);
}

#[test]
fn bm_increments_have_gaussian_moments() {
    let grid = TimeGrid::uniform(0.0, 1.0, 64).unwrap();
    let incs: Vec<f64> = par_samples(seed("bm"), 4_000, |rng| simulate_bm_path(rng, &grid, 0.3))
        .into_iter()
        .flat_map(|p| {
            let h = 1.0 / 64.0;
            p.values
                .windows(2)
                .map(move |w| (w[1] - w[0] - 0.3 * h) / h.sqrt())
                .collect::<Vec<_>>()
        })
        .collect();
    let n = incs.len() as f64;
    let (skew, kurt) = skew_kurtosis(&incs);
    // standard errors of sample skewness and excess kurtosis for Gaussian data
    assert!(skew.abs() < 5.0 * (6.0 / n).sqrt(), "skewness {skew}");
    assert!(
        kurt.abs() < 5.0 * (24.0 / n).sqrt(),
        "excess kurtosis {kurt}"
    );
}

#[test]
fn asian_mc_matches_quadrature_up_to_four_and_two() {
    let mut bad = Vec::new();
    for n in 1..=4u32 {
        for t in [0.5, 1.0, 2.0] {
            let mc = a_n_mc(seed(&format!("asian/{n}/{t}")), n, t, 100_000).unwrap();
            let q = a_n_quadrature(n as usize, t).unwrap();
            let z = mc.estimate.z_score(q);
            if z.abs() > 3.0 {
                bad.push(format!(
                    "a_{n}({t}): {q} vs {} ± {} (z = {z:.2})",
                    mc.estimate.mean, mc.estimate.std_error
                ));
            }
        }
    }
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}

#[test]
fn gamma_harness_ratio_independent_of_past_and_span() {
    assert_all_pass(
        &gamma_harness_check(seed("gamma"), 50_000, (0.5, 1.0, 2.0, 3.0), 3.0, 0.01).unwrap(),
    );
}

#[test]
fn corrected_crossing_beats_sign_changes() {
    assert_all_pass(&[lp::hit_bias_check(seed("bias"), 0.2, 0.5, 1.0, 32, 50_000, 3.0).unwrap()]);
}

#[test]
fn g_law_ks_passes_at_every_resolution() {
    let reports = lp::g_resolution_scan(
        seed("scan"),
        -0.5,
        0.5,
        1.0,
        &[128, 512, 2048],
        100_000,
        0.01,
    )
    .unwrap();
    assert_eq!(reports.iter().filter(|r| r.gated).count(), 3);
    assert_all_pass(&reports);
}

#[test]
fn levy_paths_jump_down_and_tanaka_sum_is_nonnegative() {
    assert_all_pass(
        &levy::pathwise_checks(
            seed("levy"),
            LevyModel::default(),
            1.0,
            &[0.5, 1.0, 1.5],
            20_000,
        )
        .unwrap(),
    );
}

#[test]
fn inverse_bes3_put_rises_while_mean_falls() {
    assert_all_pass(
        &monotonicity_checks(seed("bes3"), &[0.25, 0.5, 1.0, 2.0, 4.0], 1.0, 100_000, 3.0).unwrap(),
    );
}
