use rand::Rng;
use serde::Serialize;

use crate::closed_forms::bridge_hit_prob;
use crate::error::{ensure, Result};
use crate::samplers::{exp1, hitting_time, inverse_gaussian, normal, uniform};

/// Last visit g of a level before the horizon; `g = 0` when it is never
/// reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LastPassageSample {
    pub g: f64,
    pub hit_any: bool,
}

/// Step size and truncation rule for infinite-horizon engines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HorizonPolicy {
    pub step: f64,
    /// Stop once the chance of a further crossing drops below this.
    pub bound: f64,
    /// Samples still running at this time are censored.
    pub max_time: f64,
}

impl Default for HorizonPolicy {
    fn default() -> Self {
        Self {
            step: 0.02,
            bound: 1e-5,
            max_time: 1e4,
        }
    }
}

impl HorizonPolicy {
    fn validate(&self) -> Result<()> {
        ensure(
            self.step > 0.0 && self.bound > 0.0 && self.bound < 1.0 && self.max_time > self.step,
            || format!("invalid horizon policy {self:?}"),
        )
    }
}

/// Outcome of an infinite-horizon last-passage simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransientSample {
    pub g: f64,
    pub hit_any: bool,
    pub censored: bool,
    /// Path value at the requested observation time, if any.
    pub observed: Option<f64>,
}

/// Chance that a Brownian bridge over a cell of width `w` touches the level,
/// with `a`, `b` the endpoint offsets from the level.
pub fn crossing_prob(a: f64, b: f64, w: f64) -> f64 {
    if a * b <= 0.0 {
        return 1.0;
    }
    bridge_hit_prob(-a, b - a, w).unwrap_or(1.0)
}

const MAX_REJECTIONS: u32 = 1_000_000;

/// Offset in [0, w] of the last crossing of a bridge from `a` to `b`
/// (offsets from the level) conditioned to cross.
///
/// Each step draws the midpoint and asks whether the right half crosses,
/// then the left half. Draws where neither half crosses are rejected, which
/// leaves exactly the law conditioned on crossing.
pub fn refine_last_crossing<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64, w: f64) -> f64 {
    let (mut lo, mut a, mut b, mut w) = (0.0, a, b, w);
    let stop = w * 1e-7;
    let mut rejected = 0;
    while w > stop && rejected < MAX_REJECTIONS {
        let h = 0.5 * w;
        let m = 0.5 * (a + b) + (0.25 * w).sqrt() * normal(rng);
        if uniform(rng) < crossing_prob(m, b, h) {
            lo += h;
            a = m;
            w = h;
        } else if uniform(rng) < crossing_prob(a, m, h) {
            b = m;
            w = h;
        } else {
            rejected += 1;
        }
    }
    lo + 0.5 * w
}

fn last_crossing_backward<R: Rng + ?Sized>(
    rng: &mut R,
    times: &[f64],
    values: &[f64],
    level: f64,
    corrected: bool,
) -> Option<f64> {
    for i in (1..times.len()).rev() {
        let (a, b) = (values[i - 1] - level, values[i] - level);
        let w = times[i] - times[i - 1];
        if corrected {
            if uniform(rng) < crossing_prob(a, b, w) {
                return Some(times[i - 1] + refine_last_crossing(rng, a, b, w));
            }
        } else if a * b <= 0.0 {
            let frac = if a == b { 1.0 } else { a / (a - b) };
            return Some(times[i - 1] + frac * w);
        }
    }
    None
}

/// Last visit of `l` before `t` by B + νu, with its endpoint B_t + νt.
pub(crate) fn finite_horizon_with_end<R: Rng + ?Sized>(
    rng: &mut R,
    nu: f64,
    l: f64,
    t: f64,
    cells: usize,
    corrected: bool,
) -> Result<(LastPassageSample, f64)> {
    ensure(t > 0.0 && cells > 0, || {
        format!("need t > 0 and cells > 0, got {t}, {cells}")
    })?;
    let h = t / cells as f64;
    let sh = h.sqrt();
    let mut values = Vec::with_capacity(cells + 1);
    let mut x = 0.0;
    values.push(x);
    for _ in 0..cells {
        x += nu * h + sh * normal(rng);
        values.push(x);
    }
    let times: Vec<f64> = (0..=cells)
        .map(|i| if i == cells { t } else { i as f64 * h })
        .collect();
    let g = last_crossing_backward(rng, &times, &values, l, corrected);
    let sample = LastPassageSample {
        g: g.unwrap_or(0.0),
        hit_any: g.is_some(),
    };
    Ok((sample, x))
}

/// g_l^{(ν)}(t) from a path on `cells` equal cells. With `bridge_corrected`
/// each cell is tested with the exact bridge crossing probability; without
/// it only sign changes count and the crossing is placed by linear
/// interpolation.
pub fn sample_g_finite_horizon<R: Rng + ?Sized>(
    rng: &mut R,
    nu: f64,
    l: f64,
    t: f64,
    cells: usize,
    bridge_corrected: bool,
) -> Result<LastPassageSample> {
    finite_horizon_with_end(rng, nu, l, t, cells, bridge_corrected).map(|(s, _)| s)
}

/// Last passage at `level` of x₀ + B_u + μu over the whole half-line, μ ≠ 0.
///
/// With `ig_jump` the path skips straight to the first hit of the level
/// (inverse Gaussian time, or no hit at all with the Cameron–Martin
/// probability). `observe` records the path value at that time; it cannot be
/// combined with `ig_jump`.
pub fn sample_last_passage_transient<R: Rng + ?Sized>(
    rng: &mut R,
    x0: f64,
    mu: f64,
    level: f64,
    policy: HorizonPolicy,
    ig_jump: bool,
    observe: Option<f64>,
) -> Result<TransientSample> {
    policy.validate()?;
    ensure(mu != 0.0 && mu.is_finite(), || {
        format!("drift must be non-zero, got {mu}")
    })?;
    ensure(!(ig_jump && observe.is_some()), || {
        "observation needs the full path".into()
    })?;
    // mirror so that the path drifts down
    let flip = if mu > 0.0 { -1.0 } else { 1.0 };
    let (x0, level, m) = (flip * x0, flip * level, mu.abs());
    let future = |x: f64| {
        if x >= level {
            1.0
        } else {
            (-2.0 * m * (level - x)).exp()
        }
    };

    let mut u = 0.0;
    let mut x = x0;
    if ig_jump && x0 != level {
        let d = x0 - level;
        if d < 0.0 && uniform(rng) >= future(x0) {
            return Ok(TransientSample {
                g: 0.0,
                hit_any: false,
                censored: false,
                observed: None,
            });
        }
        // conditioned on hitting, the passage time is that of drift +m
        u = inverse_gaussian(rng, d.abs() / m, d * d)?;
        x = level;
    }
    let mut last: Option<(f64, f64, f64, f64)> = None;
    let mut observed = None;
    let mut censored = false;
    loop {
        if let Some(to) = observe {
            if observed.is_none() && (u - to).abs() <= 1e-12 * to.max(1.0) {
                observed = Some(flip * x);
            }
        }
        let need_obs = observe.is_some_and(|to| observed.is_none() && u < to);
        if x < level && future(x) < policy.bound && !need_obs {
            break;
        }
        if u >= policy.max_time {
            censored = true;
            break;
        }
        let mut h = policy.step;
        if let Some(to) = observe {
            if u < to && u + h > to {
                h = to - u;
            }
        }
        let xn = x - m * h + h.sqrt() * normal(rng);
        if uniform(rng) < crossing_prob(x - level, xn - level, h) {
            last = Some((u, x - level, xn - level, h));
        }
        u += h;
        x = xn;
    }
    let g = last.map(|(u0, a, b, h)| u0 + refine_last_crossing(rng, a, b, h));
    Ok(TransientSample {
        g: g.unwrap_or(0.0),
        hit_any: g.is_some(),
        censored,
        observed,
    })
}

/// sup_u ℰ_u for ℰ = exp(B_u − u/2), sampled with the exact maximum of each
/// bridge cell. Returns the supremum and a censoring flag.
pub fn sample_sup_gbm<R: Rng + ?Sized>(rng: &mut R, policy: HorizonPolicy) -> Result<(f64, bool)> {
    policy.validate()?;
    let h = policy.step;
    let sh = h.sqrt();
    let (mut x, mut s, mut u) = (0.0f64, 0.0f64, 0.0);
    // by Doob, ℰ_u / sup bounds the chance of a new maximum
    while (x - s).exp() >= policy.bound {
        if u >= policy.max_time {
            return Ok((s.exp(), true));
        }
        let xn = x - 0.5 * h + sh * normal(rng);
        let d = xn - x;
        let cell_max = 0.5 * (x + xn + (d * d + 2.0 * h * exp1(rng)).sqrt());
        s = s.max(cell_max);
        x = xn;
        u += h;
    }
    Ok((s.exp(), false))
}

/// Last passage at K ∈ (0, 1) of Brownian motion from 1 killed at 0.
///
/// Excursions above K are skipped with exact first-passage times, so only
/// the part of the path below K is stepped. Cells use width 1e-3·K², at
/// which a K-crossing and the kill in one cell are negligible.
pub fn sample_gk_killed_bm<R: Rng + ?Sized>(rng: &mut R, k: f64) -> Result<f64> {
    ensure(k > 0.0 && k < 1.0, || format!("need 0 < K < 1, got {k}"))?;
    let h = 1e-3 * k * k;
    let sh = h.sqrt();
    let mut u = hitting_time(rng, 1.0 - k)?;
    let mut g = u;
    let mut x = k;
    loop {
        let xn = x + sh * normal(rng);
        if uniform(rng) < crossing_prob(x, xn, h) {
            return Ok(g);
        }
        if xn >= k {
            let tau = if xn > k {
                hitting_time(rng, xn - k)?
            } else {
                0.0
            };
            u += h + tau;
            g = u;
            x = k;
            continue;
        }
        if uniform(rng) < crossing_prob(x - k, xn - k, h) {
            g = u + refine_last_crossing(rng, x - k, xn - k, h);
        }
        u += h;
        x = xn;
    }
}

/// Last passage at K ∈ (0, 1] of M = 1/R, R a BES(3) from 1, i.e. the last
/// visit of R to 1/K.
///
/// From r > 1/K the process returns with probability 1/(Kr), and given a
/// return it runs as a Brownian motion until then, so the return time is a
/// Brownian first-passage time. The final up-crossing is placed by linear
/// interpolation inside its cell of width 1e-4/K².
pub fn sample_gk_inv_bes3<R: Rng + ?Sized>(rng: &mut R, k: f64) -> Result<f64> {
    ensure(k > 0.0 && k <= 1.0, || format!("need 0 < K ≤ 1, got {k}"))?;
    let l = 1.0 / k;
    let h = 1e-4 * l * l;
    let sh = h.sqrt();
    let mut p = [1.0, 0.0, 0.0];
    let mut r = 1.0f64;
    let mut u = 0.0;
    loop {
        for c in &mut p {
            *c += sh * normal(rng);
        }
        let rn = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if rn > l {
            if uniform(rng) < l / rn {
                u += h + hitting_time(rng, rn - l)?;
                for c in &mut p {
                    *c *= l / rn;
                }
                r = l;
                continue;
            }
            return Ok(u + h * ((l - r) / (rn - r)).clamp(0.0, 1.0));
        }
        u += h;
        r = rn;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn crossing_prob_edges() {
        assert_eq!(crossing_prob(1.0, -1.0, 1.0), 1.0);
        assert_eq!(crossing_prob(0.0, 2.0, 1.0), 1.0);
        assert!((crossing_prob(1.0, 1.0, 1.0) - (-2.0f64).exp()).abs() < 1e-15);
        assert!((crossing_prob(-1.0, -2.0, 0.5) - (-8.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn refinement_stays_in_cell() {
        let mut rng = RngStream::new(4, 0);
        for _ in 0..200 {
            let o = refine_last_crossing(&mut rng, 0.3, 0.2, 0.1);
            assert!((0.0..=0.1).contains(&o));
        }
        // crossing is certain, the last one lies after the sign change region
        let o = refine_last_crossing(&mut rng, -1.0, 1e-9, 1.0);
        assert!(o > 0.5, "{o}");
    }

    #[test]
    fn far_level_never_hit() {
        let mut rng = RngStream::new(5, 0);
        for _ in 0..100 {
            let s = sample_g_finite_horizon(&mut rng, 0.0, 40.0, 1.0, 64, true).unwrap();
            assert!(!s.hit_any && s.g == 0.0);
        }
    }

    #[test]
    fn transient_engine_observes() {
        let mut rng = RngStream::new(6, 0);
        let s = sample_last_passage_transient(
            &mut rng,
            0.0,
            -0.5,
            0.0,
            HorizonPolicy::default(),
            false,
            Some(1.0),
        )
        .unwrap();
        assert!(s.observed.is_some() && s.hit_any && !s.censored);
        assert!(sample_last_passage_transient(
            &mut rng,
            0.0,
            -0.5,
            0.0,
            HorizonPolicy::default(),
            true,
            Some(1.0)
        )
        .is_err());
    }

    #[test]
    fn engines_reject_bad_levels() {
        let mut rng = RngStream::new(7, 0);
        assert!(sample_gk_killed_bm(&mut rng, 1.5).is_err());
        assert!(sample_gk_inv_bes3(&mut rng, 2.0).is_err());
    }
}
