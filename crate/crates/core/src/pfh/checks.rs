//! Report-producing wrappers for the residual and generating-function checks.

use super::candidate::{residual_scan, PFCandidate, ResidualMode, ResidualRegion};
use super::hermite::{hermite_candidate, pf_hermite_coeff};
use crate::closed_forms::{h_pfh_lnu, DriftLevel};
use crate::error::Result;
use crate::report::CheckReport;
use crate::rng::RngStream;

/// Exact-partials residual tolerance.
pub const EXACT_TOL: f64 = 1e-10;
/// Finite-difference residual tolerance.
pub const FD_TOL: f64 = 1e-6;

/// The PFH functions with known closed forms, plus H_{p,q} for p, q ≤ 3.
pub fn standard_candidates() -> Vec<PFCandidate> {
    let mut out = vec![
        PFCandidate::lnu(DriftLevel::new(0.0, 0.0)),
        PFCandidate::lnu(DriftLevel::new(-0.5, 0.5)),
        PFCandidate::lnu(DriftLevel::new(0.7, -0.3)),
        PFCandidate::harness(0.5),
        PFCandidate::harness(-1.2),
        PFCandidate::e_st(),
    ];
    for p in 0..=3 {
        for q in 0..=3 {
            out.push(hermite_candidate(p, q));
        }
    }
    out
}

/// Maximum normalized residual of each candidate over `points` random points,
/// with exact partials where available and with finite differences always.
pub fn residual_checks(seed: u64, points: usize) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for (i, c) in standard_candidates().iter().enumerate() {
        let mut modes = vec![(ResidualMode::FiniteDifference, FD_TOL, "finite differences")];
        if c.has_partials() {
            modes.insert(0, (ResidualMode::Exact, EXACT_TOL, "exact partials"));
        }
        for (j, (mode, tol, label)) in modes.into_iter().enumerate() {
            let mut rng = RngStream::new(seed, (2 * i + j) as u64);
            let rep = residual_scan(c, &mut rng, points, ResidualRegion::default(), mode)?;
            out.push(
                CheckReport::at_most(format!("{} residuals, {label}", c.name()), rep.max(), tol)
                    .with_seed(seed, rep.points_checked),
            );
        }
    }
    Ok(out)
}

/// Σ_{p,q ≤ order} l^p ν^q H_{p,q} against h^{(l,ν)} at a few points.
pub fn hermite_generating_check(l: f64, nu: f64, order: usize, tol: f64) -> Result<CheckReport> {
    let points = [
        (0.5, 1.5, 0.3, -0.2),
        (1.0, 3.0, -1.0, 0.8),
        (0.2, 4.0, 2.0, 1.0),
    ];
    let mut worst: f64 = 0.0;
    for &(s, t, x, y) in &points {
        let mut sum = 0.0;
        for p in 0..=order {
            for q in 0..=order {
                sum += l.powi(p as i32) * nu.powi(q as i32) * pf_hermite_coeff(p, q, s, t, x, y)?;
            }
        }
        worst = worst.max((sum - h_pfh_lnu(s, t, x, y, DriftLevel::new(nu, l))?).abs());
    }
    Ok(CheckReport::at_most(
        format!("Hermite series to order {order} reproduces h at l={l}, nu={nu}"),
        worst,
        tol,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residuals_small_scan() {
        for r in residual_checks(3, 300).unwrap() {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn generating_function() {
        assert!(hermite_generating_check(0.2, 0.1, 10, 1e-8).unwrap().pass);
        assert!(!hermite_generating_check(0.2, 0.1, 1, 1e-8).unwrap().pass);
    }
}
