//! Past-future harmonic functions: candidates, PDE residuals, transforms,
//! Hermite coefficients and martingale tests.
//!
//! A candidate h(s,t;x,y) is PFH when h(s,t;B_s,B_t) is a martingale for the
//! past-future filtration, which happens iff both
//!
//! ```text
//! (−)  h_s + (y−x)/(t−s)·h_x + ½h_xx = 0
//! (+) −h_t − (y−x)/(t−s)·h_y + ½h_yy = 0
//! ```
//!
//! hold. Residuals are reported relative to the size of the individual terms,
//! `|sum|/max(1, Σ|term|)`, since the exponential candidates span many orders
//! of magnitude over the sampling box.

mod candidate;
mod checks;
mod hermite;
mod kdecomp;
mod martingale;
mod projection;
mod transforms;

pub use candidate::{
    e_st_residuals, residual_scan, Fn4, PFCandidate, Partials, ResidualMode, ResidualRegion,
    ResidualReport,
};
pub use checks::{
    hermite_generating_check, residual_checks, standard_candidates, EXACT_TOL, FD_TOL,
};
pub use hermite::{hermite, hermite_5var, hermite_candidate, pf_hermite_coeff};
pub use kdecomp::{k_decomposition_check, k_minus_check};
pub use martingale::{
    conditional_martingale_test, gamma_harness_check, pairing_martingale_test, PairingSetup,
};
pub use projection::{pf_projection_exponential, projection_checks, StepFunction};
pub use transforms::{
    exponential_kernel, from_spacetime_harmonic, transform_drift_shift, transform_scale,
    transform_time_inversion, Fn2,
};
