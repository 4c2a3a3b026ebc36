//! Past-future projection of exponential martingales driven by step
//! functions.

use crate::error::{domain, ensure, Result};
use crate::grid::{PathSample, TimeGrid};
use crate::paths::simulate_bm_path;
use crate::report::CheckReport;
use crate::stats::McEstimate;

/// Right-continuous step function: `values[i]` on `[knots[i], knots[i+1])`,
/// zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        ensure(
            knots.len() == values.len() + 1 && !values.is_empty(),
            || "need one more knot than values".into(),
        )?;
        ensure(
            knots[0] >= 0.0 && knots.windows(2).all(|w| w[0] < w[1]),
            || format!("knots must be increasing and non-negative: {knots:?}"),
        )?;
        Ok(Self { knots, values })
    }

    pub fn zero() -> Self {
        Self {
            knots: vec![0.0, 1.0],
            values: vec![0.0],
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn support_end(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    fn pieces(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.knots
            .windows(2)
            .zip(&self.values)
            .filter_map(move |(w, &v)| {
                let lo = w[0].max(a);
                let hi = w[1].min(b);
                (hi > lo).then_some((lo, hi, v))
            })
    }

    /// ∫_a^b f du.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.pieces(a, b).map(|(lo, hi, v)| v * (hi - lo)).sum()
    }

    /// ∫_a^b f² du.
    pub fn integral_sq(&self, a: f64, b: f64) -> f64 {
        self.pieces(a, b).map(|(lo, hi, v)| v * v * (hi - lo)).sum()
    }

    /// ∫ f·g du over the whole line.
    pub fn inner(&self, g: &StepFunction) -> f64 {
        self.pieces(f64::NEG_INFINITY, f64::INFINITY)
            .map(|(lo, hi, v)| v * g.integral(lo, hi))
            .sum()
    }

    /// ∫_a^b f dB along a path whose grid contains every needed time.
    pub fn stochastic_integral(&self, path: &PathSample, a: f64, b: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (lo, hi, v) in self.pieces(a, b) {
            acc += v * (value_at(path, hi)? - value_at(path, lo)?);
        }
        Ok(acc)
    }
}

fn value_at(path: &PathSample, u: f64) -> Result<f64> {
    let pts = path.grid.points();
    let i = pts.partition_point(|&p| p < u - 1e-12);
    if i < pts.len() && (pts[i] - u).abs() <= 1e-12 {
        Ok(path.values[i])
    } else {
        Err(domain(format!("time {u} is not on the simulated grid")))
    }
}

/// (F¹, F², F³) with F¹F²F³ = E[exp(∫₀^T f dB − ½∫₀^T f²) | past before s,
/// future after t].
pub fn pf_projection_exponential(
    f: &StepFunction,
    s: f64,
    t: f64,
    path: &PathSample,
) -> Result<(f64, f64, f64)> {
    ensure(0.0 < s && s < t, || format!("need 0 < s < t, got {s}, {t}"))?;
    let horizon = path.grid.end();
    if f.support_end() > horizon + 1e-12 {
        return Err(domain(format!(
            "support ends at {} beyond simulated horizon {horizon}",
            f.support_end()
        )));
    }
    let f1 = (f.stochastic_integral(path, 0.0, s)? - 0.5 * f.integral_sq(0.0, s)).exp();
    let mid = f.integral(s, t);
    let slope = (value_at(path, t)? - value_at(path, s)?) / (t - s);
    let f2 = (mid * slope - mid * mid / (2.0 * (t - s))).exp();
    let f3 = (f.stochastic_integral(path, t, horizon)? - 0.5 * f.integral_sq(t, horizon)).exp();
    Ok((f1, f2, f3))
}

fn merged_grid(fs: &[&StepFunction], extra: &[f64]) -> Result<TimeGrid> {
    let mut pts: Vec<f64> = vec![0.0];
    for f in fs {
        pts.extend_from_slice(f.knots());
    }
    pts.extend_from_slice(extra);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    TimeGrid::new(pts)
}

/// Monte Carlo checks of the projection. `g` must vanish on [s, t].
/// Closed form: E[e^{∫g dB}·F] = exp(∫fg + ½∫g²) for F the exponential
/// martingale of f at T.
#[allow(clippy::too_many_arguments)]
pub fn projection_checks(
    seed: u64,
    f: &StepFunction,
    g: &StepFunction,
    s: f64,
    t: f64,
    horizon: f64,
    n: usize,
    k: f64,
) -> Result<Vec<CheckReport>> {
    ensure(g.integral_sq(s, t) == 0.0, || {
        "g must vanish on [s, t]".into()
    })?;
    ensure(
        f.support_end() <= horizon && g.support_end() <= horizon,
        || "supports must end before the horizon".into(),
    )?;
    let grid = merged_grid(&[f, g], &[s, t, horizon])?;
    let rows = crate::mc::try_par_samples(seed, n, |rng| -> Result<[f64; 3]> {
        let p = simulate_bm_path(rng, &grid, 0.0);
        let (f1, f2, f3) = pf_projection_exponential(f, s, t, &p)?;
        let big_f =
            (f.stochastic_integral(&p, 0.0, horizon)? - 0.5 * f.integral_sq(0.0, horizon)).exp();
        let z = g.stochastic_integral(&p, 0.0, horizon)?.exp();
        Ok([f1 * f2 * f3, z * big_f, z * f1 * f2 * f3])
    })?;
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<f64>>();
    let closed = (f.inner(g) + 0.5 * g.integral_sq(0.0, horizon)).exp();
    let a = McEstimate::from_samples(&col(1))?;
    let b = McEstimate::from_samples(&col(2))?;
    let diff = McEstimate::from_samples(&rows.iter().map(|r| r[1] - r[2]).collect::<Vec<_>>())?;
    Ok(vec![
        CheckReport::z_test(
            "projection has mean one",
            1.0,
            McEstimate::from_samples(&col(0))?,
            k,
            seed,
        ),
        CheckReport::z_test("pairing with exponential martingale", closed, a, k, seed),
        CheckReport::z_test("pairing with projection", closed, b, k, seed),
        CheckReport::z_test("pairing difference", 0.0, diff, k, seed),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn zero_function_projects_to_one() {
        let grid = TimeGrid::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let p = simulate_bm_path(&mut RngStream::new(1, 0), &grid, 0.0);
        let (a, b, c) = pf_projection_exponential(&StepFunction::zero(), 1.0, 2.0, &p).unwrap();
        assert_eq!(a * b * c, 1.0);
    }

    #[test]
    fn step_integrals() {
        let f = StepFunction::new(vec![0.0, 1.0, 3.0], vec![2.0, -1.0]).unwrap();
        assert_eq!(f.integral(0.5, 2.0), 1.0 - 1.0);
        assert_eq!(f.integral_sq(0.0, 3.0), 4.0 + 2.0);
        let g = StepFunction::new(vec![0.5, 2.0], vec![3.0]).unwrap();
        assert_eq!(f.inner(&g), 2.0 * 3.0 * 0.5 - 3.0);
        assert!(StepFunction::new(vec![1.0, 0.0], vec![1.0]).is_err());
    }

    #[test]
    fn support_beyond_horizon_rejected() {
        let grid = TimeGrid::new(vec![0.0, 1.0, 2.0]).unwrap();
        let p = simulate_bm_path(&mut RngStream::new(1, 0), &grid, 0.0);
        let f = StepFunction::new(vec![0.0, 3.0], vec![1.0]).unwrap();
        assert!(pf_projection_exponential(&f, 0.5, 1.0, &p).is_err());
    }

    #[test]
    fn projection_mc() {
        let f = StepFunction::new(vec![0.0, 0.5, 1.5, 2.5], vec![0.5, -0.8, 0.6]).unwrap();
        let g = StepFunction::new(vec![0.0, 1.0, 2.0, 2.5], vec![0.4, 0.0, -0.5]).unwrap();
        let reps = projection_checks(3, &f, &g, 1.0, 2.0, 2.5, 20_000, 3.0).unwrap();
        for r in &reps {
            assert!(r.pass, "{r:?}");
        }
    }
}
