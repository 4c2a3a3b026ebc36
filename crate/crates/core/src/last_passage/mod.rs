//! Monte Carlo oracles for last-passage times and the finite-horizon Azéma
//! formulas.
//!
//! All engines detect level crossings cell by cell with the exact Brownian
//! bridge crossing probability, then locate the last crossing by rejection
//! bisection. Infinite-horizon engines stop once the probability of any
//! further crossing falls below [`HorizonPolicy::bound`].

mod checks;
mod engine;

pub use checks::{
    azema_conditional_check, bridge_crossing_check, conditional_given_g_check, doob_sup_check,
    g_decomposition_check, g_law_check, g_law_mass_check, g_resolution_scan, hit_bias_check,
    local_time_put_checks, note2_gk_law_check, put_identity_check, reflection_identity_check,
    GkFlavor,
};
pub use engine::{
    crossing_prob, refine_last_crossing, sample_g_finite_horizon, sample_gk_inv_bes3,
    sample_gk_killed_bm, sample_last_passage_transient, sample_sup_gbm, HorizonPolicy,
    LastPassageSample, TransientSample,
};
