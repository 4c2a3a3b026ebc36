//! Property tests for the analytic evaluators and transforms.

use proptest::prelude::*;

use pflab::asian::a_n_quadrature;
use pflab::closed_forms::{
    bridge_hit_prob, c_quadratic, g0_law, g_nu_law, h_pfh_lnu, r_of_t, sigma_pf, DriftLevel,
};
use pflab::pfh::{pf_hermite_coeff, transform_time_inversion, PFCandidate};
use pflab::{derive_seed, mc::par_samples, samplers::normal, RngStream};
use rand::RngCore;

fn window() -> impl Strategy<Value = (f64, f64)> {
    (0.05f64..3.0, 0.05f64..3.0).prop_map(|(s, d)| (s, s + d))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn sigma_pf_is_a_probability_vanishing_on_opposite_sides(
        (s, t) in window(),
        x in -3.0f64..3.0,
        y in -3.0f64..3.0,
        nu in -1.0f64..1.0,
        l in -1.0f64..1.0,
    ) {
        let v = sigma_pf(s, t, x, y, DriftLevel::new(nu, l)).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        let product = (x + nu * s - l) * (y + nu * t - l);
        prop_assert_eq!(v == 0.0, product <= 0.0);
    }

    #[test]
    fn bridge_hit_prob_monotone(lambda in 0.01f64..3.0, u in 0.05f64..5.0, du in 0.01f64..2.0, dl in 0.01f64..2.0) {
        let base = bridge_hit_prob(lambda, 0.0, u).unwrap();
        prop_assert!(bridge_hit_prob(lambda, 0.0, u + du).unwrap() >= base);
        prop_assert!(bridge_hit_prob(lambda + dl, 0.0, u).unwrap() <= base);
        prop_assert!((0.0..=1.0).contains(&base));
    }

    #[test]
    fn time_inversion_is_an_involution(
        (s, t) in window(),
        x in -2.0f64..2.0,
        y in -2.0f64..2.0,
        nu in -1.0f64..1.0,
        l in -1.0f64..1.0,
    ) {
        let lvl = DriftLevel::new(nu, l);
        let h = PFCandidate::lnu(lvl);
        let twice = transform_time_inversion(&transform_time_inversion(&h));
        let direct = h_pfh_lnu(s, t, x, y, lvl).unwrap();
        let back = twice.eval(s, t, x, y).unwrap();
        prop_assert!((back - direct).abs() <= 1e-12 * direct.abs().max(1.0), "{} vs {}", back, direct);
    }

    #[test]
    fn last_passage_laws_normalize(x in -2.0f64..2.0, nu in -1.0f64..1.0, t in 0.2f64..4.0) {
        for law in [g0_law(x, t).unwrap(), g_nu_law(x, nu, t).unwrap()] {
            let mass = law.total_mass().unwrap();
            prop_assert!((mass - 1.0).abs() < 1e-6, "mass {}", mass);
            prop_assert!((law.cdf(t).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn c_quadratic_nonnegative_and_vanishing_pattern(gaps in prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], 0..6)) {
        let s: Vec<f64> = gaps.iter().scan(0.0, |acc, g| { *acc += g; Some(*acc) }).collect();
        let c = c_quadratic(&s).unwrap();
        prop_assert!(c >= 0.0);
        // the last gap carries weight zero
        let n = s.len();
        let vanishes = n <= 1 || s[n - 2] == 0.0;
        prop_assert_eq!(c == 0.0, vanishes);
    }

    #[test]
    fn hermite_partial_sums_converge(
        l in -0.3f64..0.3,
        nu in -0.3f64..0.3,
        s in 0.1f64..1.0,
        d in 0.5f64..2.0,
        x in -1.0f64..1.0,
        y in -1.0f64..1.0,
    ) {
        let t = s + d;
        let exact = h_pfh_lnu(s, t, x, y, DriftLevel::new(nu, l)).unwrap();
        let partial = |order: usize| {
            let mut sum = 0.0;
            for p in 0..=order {
                for q in 0..=order {
                    sum += l.powi(p as i32) * nu.powi(q as i32) * pf_hermite_coeff(p, q, s, t, x, y).unwrap();
                }
            }
            sum
        };
        let errs: Vec<f64> = [6, 12, 24].iter().map(|&o| (partial(o) - exact).abs()).collect();
        let floor = 1e-12 * exact.max(1.0);
        prop_assert!(errs.windows(2).all(|w| w[1] <= w[0] + floor), "errors {:?}", errs);
        prop_assert!(errs[2] < 1e-9 * exact.max(1.0), "errors {:?}", errs);
    }

    #[test]
    fn streams_are_deterministic(seed in any::<u64>(), stream in any::<u64>()) {
        let mut a = RngStream::new(seed, stream);
        let mut b = RngStream::new(seed, stream);
        for _ in 0..8 {
            prop_assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = RngStream::new(seed, stream.wrapping_add(1));
        let mut a = RngStream::new(seed, stream);
        prop_assert_ne!(a.next_u64(), c.next_u64());
    }
}

#[test]
fn par_samples_independent_of_worker_count() {
    let seed = derive_seed(7, "invariants/workers");
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| par_samples(seed, 5_000, normal))
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(4));
}

#[test]
fn asian_moments_at_least_one() {
    for n in 1..=4 {
        for t in [0.1, 0.25, 0.5, 1.0, 2.0, 4.0] {
            let a = a_n_quadrature(n, t).unwrap();
            assert!(a >= 1.0 - 1e-10, "a_{n}({t}) = {a}");
        }
    }
}

#[test]
fn r_of_t_asymptotics() {
    let small = 1e-4;
    let ratio = r_of_t(small).unwrap() * (2.0 * std::f64::consts::PI / small).sqrt();
    assert!((ratio - 1.0).abs() < 0.02, "small-t ratio {ratio}");
    let large = 400.0f64;
    let limit = (2.0 / std::f64::consts::PI).sqrt() / 6.0;
    let scaled = large.powf(1.5) * r_of_t(large).unwrap();
    assert!(
        (scaled / limit - 1.0).abs() < 0.05,
        "large-t {scaled} vs {limit}"
    );
}
