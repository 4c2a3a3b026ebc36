//! Path and conditional-path samplers.

use rand::Rng;

use crate::error::{ensure, Result};
use crate::grid::{PathSample, TimeGrid};
use crate::samplers::{gamma, normal};

/// B_t + νt on the grid. The value at the first grid point is drawn from its
/// law at that time (zero when the grid starts at 0).
pub fn simulate_bm_path<R: Rng + ?Sized>(rng: &mut R, grid: &TimeGrid, nu: f64) -> PathSample {
    let t = grid.points();
    let mut values = Vec::with_capacity(t.len());
    let t0 = t[0];
    values.push(if t0 > 0.0 {
        nu * t0 + t0.sqrt() * normal(rng)
    } else {
        0.0
    });
    for i in 1..t.len() {
        let dt = t[i] - t[i - 1];
        let prev = values[i - 1];
        values.push(prev + nu * dt + dt.sqrt() * normal(rng));
    }
    PathSample {
        grid: grid.clone(),
        values,
    }
}

/// Fills `out` with a driftless Brownian bridge from x at the first time in `t` to y at the last.
pub fn fill_bridge<R: Rng + ?Sized>(rng: &mut R, t: &[f64], x: f64, y: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(x);
    let end = t[t.len() - 1];
    for i in 1..t.len() - 1 {
        let prev = out[i - 1];
        let (s, u) = (t[i - 1], t[i]);
        let w = (u - s) / (end - s);
        let mean = prev + w * (y - prev);
        let var = (u - s) * (end - u) / (end - s);
        out.push(mean + var.sqrt() * normal(rng));
    }
    out.push(y);
}

/// B_u given B_s = x and B_t = y.
pub fn sample_bridge_point<R: Rng + ?Sized>(
    rng: &mut R,
    s: f64,
    t: f64,
    x: f64,
    y: f64,
    u: f64,
) -> Result<f64> {
    ensure(s < u && u < t, || {
        format!("need s < u < t, got {s}, {u}, {t}")
    })?;
    let w = (u - s) / (t - s);
    let var = (u - s) * (t - u) / (t - s);
    Ok(x + w * (y - x) + var.sqrt() * normal(rng))
}

/// (B_s, B_t) given B_{s'} = x and B_{t'} = y, for s' < s < t < t'.
pub fn sample_pf_interior_pair<R: Rng + ?Sized>(
    rng: &mut R,
    s_out: f64,
    t_out: f64,
    x: f64,
    y: f64,
    s: f64,
    t: f64,
) -> Result<(f64, f64)> {
    ensure(s_out < s && s < t && t < t_out, || {
        format!("need s' < s < t < t', got {s_out}, {s}, {t}, {t_out}")
    })?;
    let bs = sample_bridge_point(rng, s_out, t_out, x, y, s)?;
    let bt = sample_bridge_point(rng, s, t_out, bs, y, t)?;
    Ok((bs, bt))
}

/// BES(3) from a > 0 at time t, as the norm of a 3-d Brownian motion.
pub fn sample_bes3_at<R: Rng + ?Sized>(rng: &mut R, t: f64, a: f64) -> Result<f64> {
    ensure(t >= 0.0 && a > 0.0, || {
        format!("need t ≥ 0, a > 0, got {t}, {a}")
    })?;
    let r = t.sqrt();
    let x = a + r * normal(rng);
    let y = r * normal(rng);
    let z = r * normal(rng);
    Ok((x * x + y * y + z * z).sqrt())
}

/// BES(3) path from a, driven by exact 3-d Gaussian increments.
pub fn simulate_bes3_path<R: Rng + ?Sized>(
    rng: &mut R,
    grid: &TimeGrid,
    a: f64,
) -> Result<PathSample> {
    ensure(a > 0.0, || {
        format!("BES(3) start must be positive, got {a}")
    })?;
    let t = grid.points();
    let mut p = [a, 0.0, 0.0];
    if t[0] > 0.0 {
        let r = t[0].sqrt();
        for c in &mut p {
            *c += r * normal(rng);
        }
    }
    let mut values = Vec::with_capacity(t.len());
    values.push((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt());
    for i in 1..t.len() {
        let r = (t[i] - t[i - 1]).sqrt();
        for c in &mut p {
            *c += r * normal(rng);
        }
        values.push((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt());
    }
    PathSample::new(grid.clone(), values)
}

/// Gamma subordinator with independent Gamma(Δt, 1) increments.
pub fn simulate_gamma_process<R: Rng + ?Sized>(rng: &mut R, grid: &TimeGrid) -> Result<PathSample> {
    let t = grid.points();
    let mut values = Vec::with_capacity(t.len());
    values.push(if t[0] > 0.0 { gamma(rng, t[0])? } else { 0.0 });
    for i in 1..t.len() {
        let inc = gamma(rng, t[i] - t[i - 1])?;
        values.push(values[i - 1] + inc);
    }
    PathSample::new(grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::special::prob_abs_normal_le;
    use crate::stats::{ks_two_sample, EmpiricalDistribution, McEstimate};

    #[test]
    fn bm_endpoint_moments() {
        let g = TimeGrid::uniform(0.0, 1.0, 1).unwrap();
        let mut r = RngStream::new(11, 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| simulate_bm_path(&mut r, &g, 2.0).last())
            .collect();
        let m = McEstimate::from_samples(&xs).unwrap();
        assert!(m.z_score(2.0).abs() < 3.0);
        let v = McEstimate::of(&xs, |x| (x - 2.0) * (x - 2.0)).unwrap();
        assert!(v.z_score(1.0).abs() < 3.0);
    }

    #[test]
    fn exponential_martingale_has_mean_one() {
        let g = TimeGrid::uniform(0.0, 4.0, 4).unwrap();
        let mut r = RngStream::new(12, 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| simulate_bm_path(&mut r, &g, -0.5).last().exp())
            .collect();
        assert!(McEstimate::from_samples(&xs).unwrap().z_score(1.0).abs() < 3.0);
    }

    #[test]
    fn bridge_point_moments_and_domain() {
        let mut r = RngStream::new(13, 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_bridge_point(&mut r, 0.0, 1.0, 1.0, 3.0, 0.5).unwrap())
            .collect();
        assert!(McEstimate::from_samples(&xs).unwrap().z_score(2.0).abs() < 3.0);
        let v = McEstimate::of(&xs, |x| (x - 2.0) * (x - 2.0)).unwrap();
        assert!(v.z_score(0.25).abs() < 3.0);
        assert!(sample_bridge_point(&mut r, 0.0, 1.0, 0.0, 0.0, 1.0).is_err());
        let near = sample_bridge_point(&mut r, 0.0, 1.0, 0.7, 0.0, 1e-14).unwrap();
        assert!((near - 0.7).abs() < 1e-5);
    }

    #[test]
    fn interior_pair_covariance_and_marginal() {
        let mut r = RngStream::new(14, 0);
        let n = 100_000;
        let pairs: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                sample_pf_interior_pair(&mut r, 0.0, 1.0, 0.0, 0.0, 1.0 / 3.0, 2.0 / 3.0).unwrap()
            })
            .collect();
        let prod: Vec<f64> = pairs.iter().map(|p| p.0 * p.1).collect();
        assert!(
            McEstimate::from_samples(&prod)
                .unwrap()
                .z_score(1.0 / 9.0)
                .abs()
                < 3.0
        );
        let marg = EmpiricalDistribution::new(pairs.iter().map(|p| p.0).collect()).unwrap();
        let direct = EmpiricalDistribution::new(
            (0..n)
                .map(|_| sample_bridge_point(&mut r, 0.0, 1.0, 0.0, 0.0, 1.0 / 3.0).unwrap())
                .collect(),
        )
        .unwrap();
        assert!(ks_two_sample(&marg, &direct).unwrap().p_value > 0.01);
        assert!(sample_pf_interior_pair(&mut r, 0.0, 1.0, 0.0, 0.0, 0.5, 0.4).is_err());
    }

    #[test]
    fn bes3_inverse_moment() {
        let mut r = RngStream::new(15, 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| 1.0 / sample_bes3_at(&mut r, 1.0, 1.0).unwrap())
            .collect();
        let m = McEstimate::from_samples(&xs).unwrap();
        assert!(m.z_score(prob_abs_normal_le(1.0)).abs() < 3.0, "{m:?}");
        assert!((sample_bes3_at(&mut r, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let g = TimeGrid::uniform(0.0, 1.0, 8).unwrap();
        assert!(simulate_bes3_path(&mut r, &g, 1.0)
            .unwrap()
            .values
            .iter()
            .all(|&v| v > 0.0));
    }

    #[test]
    fn gamma_process_mean() {
        let g = TimeGrid::uniform(0.0, 2.0, 4).unwrap();
        let mut r = RngStream::new(16, 0);
        let xs: Vec<f64> = (0..50_000)
            .map(|_| simulate_gamma_process(&mut r, &g).unwrap().last())
            .collect();
        assert!(McEstimate::from_samples(&xs).unwrap().z_score(2.0).abs() < 3.0);
    }
}
