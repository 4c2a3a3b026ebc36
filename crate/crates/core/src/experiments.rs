//! Named experiments: fixed bundles of checks run from one configuration.
//!
//! Every check draws from its own seed, derived from the run seed and a
//! label, so a selector produces the same reports alone or inside `all`.

use std::time::Instant;

use serde::Serialize;

use crate::asian;
use crate::closed_forms::{e_st, h_pfh_harness, h_pfh_lnu, sigma_pf, DriftLevel};
use crate::error::{Error, Result};
use crate::last_passage::{self as lp, GkFlavor, HorizonPolicy};
use crate::levy::{self, LevyModel};
use crate::pfh::{self, PairingSetup, StepFunction};
use crate::report::{CheckReport, SuiteSummary};
use crate::rng::derive_seed;
use crate::strict_local as sl;

/// Base statistical threshold in standard errors.
pub const BASE_SIGMAS: f64 = 3.0;
/// KS significance level.
pub const KS_ALPHA: f64 = 0.01;

/// What to run and at which scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Paths per Monte Carlo check. A few heavy checks use a fixed fraction.
    pub paths: usize,
    /// Cells per unit time for discretized paths.
    pub grid: usize,
    /// Scales every k-sigma gate; 1 keeps the default 3σ.
    pub tol_multiplier: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            paths: 100_000,
            grid: 512,
            tol_multiplier: 1.0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: String| if ok { Ok(()) } else { Err(Error::Config(msg)) };
        check(
            self.paths >= 100,
            format!("paths must be at least 100, got {}", self.paths),
        )?;
        check(
            self.grid.is_power_of_two() && self.grid >= 2,
            format!("grid must be a power of two, got {}", self.grid),
        )?;
        check(
            self.tol_multiplier.is_finite() && self.tol_multiplier > 0.0,
            format!(
                "tolerance multiplier must be positive, got {}",
                self.tol_multiplier
            ),
        )
    }

    /// k for a k-sigma gate.
    pub fn k(&self) -> f64 {
        BASE_SIGMAS * self.tol_multiplier
    }

    fn seed_for(&self, label: &str) -> u64 {
        derive_seed(self.seed, label)
    }

    /// `paths / d`, at least 100.
    fn frac(&self, d: usize) -> usize {
        (self.paths / d).max(100)
    }
}

type Runner = fn(&RunConfig) -> Result<Vec<CheckReport>>;

/// A selectable bundle of checks.
pub struct Experiment {
    pub name: &'static str,
    pub about: &'static str,
    run: Runner,
}

impl Experiment {
    pub fn run(&self, cfg: &RunConfig) -> Result<Vec<CheckReport>> {
        (self.run)(cfg)
    }
}

/// All experiments in suite order.
pub fn registry() -> &'static [Experiment] {
    &[
        Experiment {
            name: "azema-84",
            about: "finite-horizon Azéma formula by bridge simulation",
            run: azema,
        },
        Experiment {
            name: "bridge-hitting",
            about: "bridge crossing probability and the bias of sign-change detection",
            run: bridge_hitting,
        },
        Experiment {
            name: "reflection",
            about: "2S(S-B) ~ Exp(1) independent of B",
            run: reflection,
        },
        Experiment {
            name: "pfh-residuals",
            about: "PDE residuals of PFH functions and the Hermite expansion",
            run: pfh_residuals,
        },
        Experiment {
            name: "pfh-martingales",
            about: "past-future martingale pairings, gamma harness, projections",
            run: pfh_martingales,
        },
        Experiment {
            name: "last-passage",
            about: "laws of last passage times",
            run: last_passage,
        },
        Experiment {
            name: "doob-sup",
            about: "sup laws of the exponential and Lévy martingales",
            run: doob_sup,
        },
        Experiment {
            name: "gbm-identities",
            about: "call, put and local-time identities for the exponential martingale",
            run: gbm_identities,
        },
        Experiment {
            name: "strict-local",
            about: "1/BES(3): r(t), call-put defect, asymptotics",
            run: strict_local,
        },
        Experiment {
            name: "levy-esscher",
            about: "compound Poisson Esscher martingale: Tanaka and Azéma identities",
            run: levy_esscher,
        },
        Experiment {
            name: "asian-moments",
            about: "moments of the exponential Brownian average",
            run: asian_moments,
        },
    ]
}

/// Names accepted by `run_experiment`, including `all`.
pub fn selectors() -> Vec<&'static str> {
    std::iter::once("all")
        .chain(registry().iter().map(|e| e.name))
        .collect()
}

/// Runs one experiment, or every experiment for `all`. Reports are assembled in registry order.
pub fn run_experiment(selector: &str, cfg: &RunConfig) -> Result<SuiteSummary> {
    cfg.validate()?;
    let chosen: Vec<&Experiment> = if selector == "all" {
        registry().iter().collect()
    } else {
        registry().iter().filter(|e| e.name == selector).collect()
    };
    if chosen.is_empty() {
        return Err(Error::UnknownExperiment(selector.to_string()));
    }
    let start = Instant::now();
    let mut reports = Vec::new();
    for e in chosen {
        reports.extend(e.run(cfg)?);
    }
    Ok(SuiteSummary::new(
        selector,
        cfg.seed,
        reports,
        start.elapsed().as_secs_f64(),
    ))
}

fn azema(cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    let k = cfg.k();
    Ok(vec![
        lp::azema_conditional_check(
            cfg.seed_for("azema/driftless"),
            1.0,
            2.0,
            1.0,
            1.0,
            DriftLevel::new(0.0, 0.0),
            cfg.paths,
            cfg.grid,
            k,
        )?,
        lp::azema_conditional_check(
            cfg.seed_for("azema/drifted"),
            1.0,
            2.0,
            0.8,
            1.2,
            DriftLevel::new(0.5, 0.3),
            cfg.paths,
            cfg.grid,
            k,
        )?,
    ])
}

fn bridge_hitting(cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    let k = cfg.k();
    let mut out = lp::bridge_crossing_check(cfg.seed_for("bridge/crossing"), cfg.paths, 64, k)?;
    out.push(lp::hit_bias_check(
        cfg.seed_for("bridge/hit-bias"),
        -0.5,
        0.5,
        1.0,
        64,
        cfg.paths,
        k,
    )?);
    Ok(out)
}

fn reflection(cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    lp::reflection_identity_check(cfg.seed_for("reflection"), cfg.paths, 64, cfg.k(), KS_ALPHA)
}

fn pfh_residuals(cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    let mut out = pfh::residual_checks(cfg.seed_for("pfh/residuals"), 10_000)?;
    out.push(pfh::hermite_generating_check(0.2, 0.1, 10, 1e-8)?);
    let pts: Vec<(f64, f64)> = (1..20)
        .map(|i| (0.1 * i as f64, -1.0 + 0.1 * i as f64))
        .collect();
    out.push(CheckReport::at_most(
        "K+ rewriting of exp(-2xm/(t-s))",
        pfh::k_decomposition_check(2.0, 0.7, &pts)?,
        1e-12,
    ));
    let pts3: Vec<(f64, f64, f64)> = pts.iter().map(|&(s, x)| (s, x, 0.5 - x)).collect();
    out.push(CheckReport::at_most(
        "K- rewriting of exp(-2xy/(t-s))",
        pfh::k_minus_check(2.0, &pts3)?,
        1e-12,
    ));
    Ok(out)
}

fn pfh_martingales(cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    let k = cfg.k();
    let n = cfg.paths;
    let setup = PairingSetup::new(0.5, 1.0, 2.0, 3.0);
    let phi = |b: f64| b.cos();
    let psi = |b: f64, c: f64| (c - b).cos() + b.cos();
    let lvl = DriftLevel::new(-0.5, 0.0);
    let lnu = |s, t, x, y| h_pfh_lnu(s, t, x, y, lvl).unwrap_or(f64::NAN);
    let est = |s, t, x: f64, y: f64| e_st(s, t, &[x], &[y]).unwrap_or(f64::NAN);
    let mut out = vec![
        pfh::pairing_martingale_test(
            "harness h^(1) pairs as a PF martingale",
            cfg.seed_for("pfh/harness"),
            |s, t, x, y| h_pfh_harness(s, t, x, y, 1.0).unwrap_or(f64::NAN),
            setup,
            phi,
            psi,
            n,
            k,
            false,
        )?,
        pfh::conditional_martingale_test(
            "h^(l,nu) conditional mean, l=0, nu=-1/2",
            cfg.seed_for("pfh/lnu"),
            lnu,
            (0.8, 3.2, 1.0, 0.5),
            (1.0, 3.0),
            n,
            k,
            false,
        )?,
        pfh::conditional_martingale_test(
            "h^(l,nu) conditional mean over (1,2) inside (0.5,3)",
            cfg.seed_for("pfh/lnu-heavy"),
            lnu,
            (0.5, 3.0, 1.0, 0.5),
            (1.0, 2.0),
            n,
            k,
            false,
        )?
        .diagnostic(),
        pfh::conditional_martingale_test(
            "e_s^(t) conditional mean from zero endpoints",
            cfg.seed_for("pfh/e-st-conditional"),
            est,
            (0.8, 3.2, 0.0, 0.0),
            (1.0, 3.0),
            n,
            k,
            false,
        )?,
        pfh::conditional_martingale_test(
            "e_s^(t) conditional mean over (1,2) inside (0.5,3)",
            cfg.seed_for("pfh/e-st-conditional-heavy"),
            est,
            (0.5, 3.0, 0.0, 0.0),
            (1.0, 2.0),
            n,
            k,
            false,
        )?
        .diagnostic(),
        pfh::pairing_martingale_test(
            "e_s^(t) pairs as a PF martingale",
            cfg.seed_for("pfh/e-st"),
            |s, t, x, y| e_st(s, t, &[x], &[y]).unwrap_or(f64::NAN),
            PairingSetup::new(0.05, 0.1, 2.0, 3.0),
            |b| 1.0 / (1.0 + b * b),
            |b, c| 1.0 / (1.0 + (c - b) * (c - b)),
            n,
            k,
            false,
        )?,
        pfh::pairing_martingale_test(
            "e_s^(t) pairing at (0.5, 1, 2, 3)",
            cfg.seed_for("pfh/e-st-heavy"),
            |s, t, x, y| e_st(s, t, &[x], &[y]).unwrap_or(f64::NAN),
            setup,
            |b| 1.0 / (1.0 + b * b),
            |b, c| 1.0 / (1.0 + (c - b) * (c - b)),
            n,
            k,
            false,
        )?
        .diagnostic(),
        pfh::conditional_martingale_test(
            "no-zero probability is a PF submartingale",
            cfg.seed_for("pfh/sigma"),
            |s, t, x, y| sigma_pf(s, t, x, y, DriftLevel::new(0.0, 0.0)).unwrap_or(f64::NAN),
            (0.5, 3.0, 1.0, 1.0),
            (1.0, 2.0),
            n,
            5.0 * cfg.tol_multiplier,
            true,
        )?,
    ];
    out.extend(pfh::gamma_harness_check(
        cfg.seed_for("pfh/gamma"),
        n,
        (0.5, 1.0, 2.0, 3.0),
        k,
        KS_ALPHA,
    )?);
    let f = StepFunction::new(vec![0.0, 0.5, 1.5, 2.5], vec![0.5, -0.8, 0.6])?;
    let g = StepFunction::new(vec![0.0, 1.0, 2.0, 2.5], vec![0.4, 0.0, -0.5])?;
    out.extend(pfh::projection_checks(
        cfg.seed_for("pfh/projection"),
        &f,
        &g,
        1.0,
        2.0,
        2.5,
        n,
        k,
    )?);
    Ok(out)
}

fn last_passage(cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    let k = cfg.k();
    let n = cfg.paths;
    let policy = HorizonPolicy::default();
    let mut out = vec![
        lp::g_law_check(
            cfg.seed_for("lp/arcsine"),
            0.0,
            0.0,
            1.0,
            cfg.grid,
            n,
            KS_ALPHA,
        )?,
        lp::g_law_check(
            cfg.seed_for("lp/drifted"),
            -0.5,
            0.5,
            1.0,
            cfg.grid,
            n,
            KS_ALPHA,
        )?,
        lp::g_law_mass_check(0.5, -0.5, 1.0, 1e-5)?,
        lp::g_law_mass_check(1.0, 0.8, 2.0, 1e-5)?,
        lp::g_law_mass_check(-0.7, 0.0, 1.5, 1e-5)?,
    ];
    out.extend(lp::g_resolution_scan(
        cfg.seed_for("lp/resolution"),
        -0.5,
        0.5,
        1.0,
        &[128, 512, 2048],
        cfg.frac(4),
        KS_ALPHA,
    )?);
    out.extend(lp::g_decomposition_check(
        cfg.seed_for("lp/decomp-0"),
        0.0,
        0.5,
        cfg.frac(4),
        policy,
        k,
        KS_ALPHA,
    )?);
    out.extend(lp::g_decomposition_check(
        cfg.seed_for("lp/decomp-1"),
        1.0,
        0.5,
        cfg.frac(4),
        policy,
        k,
        KS_ALPHA,
    )?);
    out.extend(lp::note2_gk_law_check(
        cfg.seed_for("lp/gk-killed"),
        0.5,
        GkFlavor::KilledBm,
        cfg.frac(10),
        k,
        KS_ALPHA,
    )?);
    out.extend(lp::note2_gk_law_check(
        cfg.seed_for("lp/gk-bes3"),
        0.5,
        GkFlavor::InverseBes3,
        cfg.frac(10),
        k,
        KS_ALPHA,
    )?);
    for bucket in [2, 10, 17] {
        out.push(lp::conditional_given_g_check(
            cfg.seed_for(&format!("lp/given-g-{bucket}")),
            "f(x)=min(x,2)",
            1.0,
            20,
            bucket,
            |x| x.min(2.0),
            n,
            cfg.grid,
            k,
        )?);
    }
    Ok(out)
}

fn doob_sup(cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    let policy = HorizonPolicy::default();
    let mut out = lp::doob_sup_check(
        cfg.seed_for("doob/gbm"),
        cfg.paths,
        policy,
        cfg.k(),
        KS_ALPHA,
    )?;
    out.extend(levy::sup_law_check(
        cfg.seed_for("doob/levy"),
        LevyModel::default(),
        cfg.paths,
        policy,
        cfg.k(),
        KS_ALPHA,
    )?);
    Ok(out)
}

fn gbm_identities(cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    let k = cfg.k();
    let policy = HorizonPolicy::default();
    let mut out = sl::prop9_1_checks(
        cfg.seed_for("gbm/call"),
        1.0,
        cfg.paths,
        policy,
        k,
        KS_ALPHA,
    )?;
    out.extend(lp::put_identity_check(
        cfg.seed_for("gbm/put-1"),
        1.0,
        1.0,
        cfg.frac(2),
        policy,
        k,
    )?);
    out.extend(lp::put_identity_check(
        cfg.seed_for("gbm/put-2"),
        0.8,
        2.0,
        cfg.frac(2),
        policy,
        k,
    )?);
    out.extend(lp::local_time_put_checks(
        &[(1.0, 1.0), (0.5, 1.0), (2.0, 1.0), (1.3, 4.0)],
        1e-6,
    )?);
    Ok(out)
}

fn strict_local(cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    let k = cfg.k();
    let n = cfg.paths;
    let mut out = Vec::new();
    for t in [0.25, 1.0, 4.0] {
        out.push(sl::call_one_check(
            cfg.seed_for(&format!("sl/call-{t}")),
            t,
            n,
            k,
        )?);
    }
    out.extend(sl::r_asymptotic_checks()?);
    out.extend(sl::r_via_times_check(cfg.seed_for("sl/times"), 1.0, n, k)?);
    out.extend(sl::witness_checks()?);
    out.extend(sl::rtilde_checks()?);
    out.extend(sl::madan_yor_check(
        cfg.seed_for("sl/madan-yor"),
        1.0,
        &[0.5, 1.0, 2.0],
        n,
        4 * n,
        k,
    )?);
    out.extend(sl::monotonicity_checks(
        cfg.seed_for("sl/monotone"),
        &[0.25, 0.5, 1.0, 2.0, 4.0],
        1.0,
        n,
        k,
    )?);
    out.extend(sl::quadratic_variation_diagnostic(
        cfg.seed_for("sl/qv"),
        1.0,
        cfg.frac(10),
        1024,
    )?);
    Ok(out)
}

fn levy_esscher(cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    let k = cfg.k();
    let n = cfg.paths;
    let m = LevyModel::default();
    let policy = HorizonPolicy::default();
    let mut out = levy::psi_checks(cfg.seed_for("levy/psi"), m, 1.0, n, k)?;
    out.extend(levy::pathwise_checks(
        cfg.seed_for("levy/pathwise"),
        m,
        5.0,
        &[0.5, 1.0, 2.0],
        cfg.frac(5),
    )?);
    for strike in [0.5, 1.0] {
        out.extend(levy::tanaka_phi_checks(
            cfg.seed_for(&format!("levy/phi-{strike}")),
            m,
            0.5,
            strike,
            n,
            k,
        )?);
        out.push(levy::tanaka_identity_check(
            cfg.seed_for(&format!("levy/tanaka-{strike}")),
            m,
            1.0,
            strike,
            n,
            16,
            k,
        )?);
    }
    out.push(levy::azema_stopping_check(
        cfg.seed_for("levy/azema-1"),
        "f=1",
        m,
        1.0,
        1.0,
        |_| 1.0,
        n,
        policy,
        k,
    )?);
    out.push(levy::azema_stopping_check(
        cfg.seed_for("levy/azema-2"),
        "f=min(m,2)",
        m,
        1.0,
        2.0,
        |x| x.min(2.0),
        n,
        policy,
        k,
    )?);
    Ok(out)
}

fn asian_moments(cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    let k = cfg.k();
    let mut out = asian::a_n_check(cfg.seed_for("asian/a2"), 2, 1.0, cfg.paths, k)?;
    out.extend(asian::a_n_check(
        cfg.seed_for("asian/a3"),
        3,
        1.0,
        cfg.frac(2),
        k,
    )?);
    out.extend(asian::a_n_check(
        cfg.seed_for("asian/a4"),
        4,
        0.5,
        cfg.frac(2),
        k,
    )?);
    out.extend(asian::a_n_check(
        cfg.seed_for("asian/a4-2"),
        4,
        2.0,
        cfg.frac(2),
        k,
    )?);
    for (n, alpha) in [(2, 5.0), (1, 2.0), (3, 10.0)] {
        out.push(asian::laplace_identity_check(n, alpha)?);
    }
    out.extend(asian::a_n_grid_checks(&[0.25, 0.5, 1.0, 2.0, 4.0])?);
    let times = [0.25, 0.5, 1.0, 2.0, 4.0];
    for (i, g) in [
        asian::ConvexFn::CallAt(1.0),
        asian::ConvexFn::Identity,
        asian::ConvexFn::Square,
        asian::ConvexFn::AbsDev,
    ]
    .into_iter()
    .enumerate()
    {
        out.extend(asian::monotonicity_check(
            cfg.seed_for(&format!("asian/monotone-{i}")),
            g,
            &times,
            cfg.frac(5),
            k,
        )?);
    }
    out.extend(asian::exp_time_identity_check(
        cfg.seed_for("asian/exp-time-0"),
        0.0,
        0.5,
        cfg.frac(10),
        KS_ALPHA,
    )?);
    out.extend(asian::exp_time_identity_check(
        cfg.seed_for("asian/exp-time-1"),
        0.5,
        0.5,
        cfg.frac(10),
        KS_ALPHA,
    )?);
    Ok(out)
}
