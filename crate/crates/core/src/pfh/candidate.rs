use rand::Rng;
use std::sync::Arc;

use crate::closed_forms::DriftLevel;
use crate::error::{domain, Result};

pub type Fn4 = Arc<dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync>;
type Pred4 = Arc<dyn Fn(f64, f64, f64, f64) -> bool + Send + Sync>;

/// Exact first and second partial derivatives of a candidate.
#[derive(Clone)]
pub struct Partials {
    pub s: Fn4,
    pub t: Fn4,
    pub x: Fn4,
    pub y: Fn4,
    pub xx: Fn4,
    pub yy: Fn4,
}

/// A function h(s,t;x,y) on a domain inside {s < t}.
#[derive(Clone)]
pub struct PFCandidate {
    name: String,
    h: Fn4,
    partials: Option<Partials>,
    domain: Pred4,
}

impl std::fmt::Debug for PFCandidate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PFCandidate")
            .field("name", &self.name)
            .field("exact_partials", &self.partials.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualMode {
    Exact,
    FiniteDifference,
}

impl PFCandidate {
    pub fn new<F>(name: impl Into<String>, h: F) -> Self
    where
        F: Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            h: Arc::new(h),
            partials: None,
            domain: Arc::new(|s, t, _, _| s < t),
        }
    }

    pub fn with_partials(mut self, p: Partials) -> Self {
        self.partials = Some(p);
        self
    }

    /// Intersects the domain with `{s < t}` and the given predicate.
    pub fn with_domain<P>(mut self, pred: P) -> Self
    where
        P: Fn(f64, f64, f64, f64) -> bool + Send + Sync + 'static,
    {
        self.domain = Arc::new(move |s, t, x, y| s < t && pred(s, t, x, y));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_partials(&self) -> bool {
        self.partials.is_some()
    }

    pub fn partials(&self) -> Option<&Partials> {
        self.partials.as_ref()
    }

    pub(crate) fn raw(&self) -> &Fn4 {
        &self.h
    }

    pub(crate) fn domain_fn(&self) -> &Pred4 {
        &self.domain
    }

    pub fn in_domain(&self, s: f64, t: f64, x: f64, y: f64) -> bool {
        (self.domain)(s, t, x, y)
    }

    pub fn eval(&self, s: f64, t: f64, x: f64, y: f64) -> Result<f64> {
        if !self.in_domain(s, t, x, y) {
            return Err(domain(format!(
                "{}: ({s}, {t}, {x}, {y}) outside domain",
                self.name
            )));
        }
        Ok((self.h)(s, t, x, y))
    }

    /// Constant function; both residuals vanish identically.
    pub fn constant(c: f64) -> Self {
        let zero: Fn4 = Arc::new(|_, _, _, _| 0.0);
        Self::new("constant", move |_, _, _, _| c).with_partials(Partials {
            s: zero.clone(),
            t: zero.clone(),
            x: zero.clone(),
            y: zero.clone(),
            xx: zero.clone(),
            yy: zero,
        })
    }

    /// h^{(l,ν)}(s,t;x,y) = exp(−2(x+νs−l)(y+νt−l)/(t−s)) with exact partials.
    pub fn lnu(lvl: DriftLevel) -> Self {
        let DriftLevel { nu, l } = lvl;
        // h = exp(E), E = −2PQ/D with P = x+νs−l, Q = y+νt−l, D = t−s
        let parts = move |s: f64, t: f64, x: f64, y: f64| {
            let d = t - s;
            let p = x + nu * s - l;
            let q = y + nu * t - l;
            let h = (-2.0 * p * q / d).exp();
            (h, p, q, d)
        };
        let f_s: Fn4 = Arc::new(move |s, t, x, y| {
            let (h, p, q, d) = parts(s, t, x, y);
            -2.0 * h * (nu * q / d + p * q / (d * d))
        });
        let f_t: Fn4 = Arc::new(move |s, t, x, y| {
            let (h, p, q, d) = parts(s, t, x, y);
            -2.0 * h * (nu * p / d - p * q / (d * d))
        });
        let f_x: Fn4 = Arc::new(move |s, t, x, y| {
            let (h, _, q, d) = parts(s, t, x, y);
            -2.0 * h * q / d
        });
        let f_y: Fn4 = Arc::new(move |s, t, x, y| {
            let (h, p, _, d) = parts(s, t, x, y);
            -2.0 * h * p / d
        });
        let f_xx: Fn4 = Arc::new(move |s, t, x, y| {
            let (h, _, q, d) = parts(s, t, x, y);
            h * 4.0 * q * q / (d * d)
        });
        let f_yy: Fn4 = Arc::new(move |s, t, x, y| {
            let (h, p, _, d) = parts(s, t, x, y);
            h * 4.0 * p * p / (d * d)
        });
        Self::new(format!("h_lnu(l={l}, nu={nu})"), move |s, t, x, y| {
            parts(s, t, x, y).0
        })
        .with_partials(Partials {
            s: f_s,
            t: f_t,
            x: f_x,
            y: f_y,
            xx: f_xx,
            yy: f_yy,
        })
    }

    /// Harness function exp(a(y−x)/(t−s) − a²/(2(t−s))) with exact partials.
    pub fn harness(a: f64) -> Self {
        let val = move |s: f64, t: f64, x: f64, y: f64| {
            let d = t - s;
            ((a * (y - x) / d - a * a / (2.0 * d)).exp(), d)
        };
        let e_s = move |s: f64, t: f64, x: f64, y: f64| {
            let d = t - s;
            a * (y - x) / (d * d) - a * a / (2.0 * d * d)
        };
        let f_s: Fn4 = Arc::new(move |s, t, x, y| val(s, t, x, y).0 * e_s(s, t, x, y));
        let f_t: Fn4 = Arc::new(move |s, t, x, y| -val(s, t, x, y).0 * e_s(s, t, x, y));
        let f_x: Fn4 = Arc::new(move |s, t, x, y| {
            let (h, d) = val(s, t, x, y);
            -a * h / d
        });
        let f_y: Fn4 = Arc::new(move |s, t, x, y| {
            let (h, d) = val(s, t, x, y);
            a * h / d
        });
        let f_2: Fn4 = Arc::new(move |s, t, x, y| {
            let (h, d) = val(s, t, x, y);
            a * a * h / (d * d)
        });
        Self::new(format!("harness(a={a})"), move |s, t, x, y| {
            val(s, t, x, y).0
        })
        .with_partials(Partials {
            s: f_s,
            t: f_t,
            x: f_x,
            y: f_y,
            xx: f_2.clone(),
            yy: f_2,
        })
    }

    /// One-dimensional e_s^{(t)} = exp(−2xy/(t−s)).
    pub fn e_st() -> Self {
        let mut c = Self::lnu(DriftLevel::new(0.0, 0.0));
        c.name = "e_st".into();
        c
    }

    fn terms(&self, d: &Derivs, s: f64, t: f64, x: f64, y: f64) -> ([f64; 3], [f64; 3]) {
        let drift = (y - x) / (t - s);
        (
            [d.s, drift * d.x, 0.5 * d.xx],
            [-d.t, -drift * d.y, 0.5 * d.yy],
        )
    }

    fn derivs(
        &self,
        mode: ResidualMode,
        step_scale: f64,
        s: f64,
        t: f64,
        x: f64,
        y: f64,
    ) -> Result<Derivs> {
        if !self.in_domain(s, t, x, y) {
            return Err(domain(format!(
                "{}: ({s}, {t}, {x}, {y}) outside domain",
                self.name
            )));
        }
        match (mode, &self.partials) {
            (ResidualMode::Exact, Some(p)) => Ok(Derivs {
                s: (p.s)(s, t, x, y),
                t: (p.t)(s, t, x, y),
                x: (p.x)(s, t, x, y),
                y: (p.y)(s, t, x, y),
                xx: (p.xx)(s, t, x, y),
                yy: (p.yy)(s, t, x, y),
            }),
            (ResidualMode::Exact, None) => {
                Err(domain(format!("{} has no exact partials", self.name)))
            }
            (ResidualMode::FiniteDifference, _) => self.fd_derivs(step_scale, s, t, x, y),
        }
    }

    /// Fourth-order central differences. Steps scale with t−s so that the
    /// 1/(t−s) structure is resolved: 2e−3·D/(1+|x|+|y|) in space and its
    /// square over D in time.
    fn fd_derivs(&self, step_scale: f64, s: f64, t: f64, x: f64, y: f64) -> Result<Derivs> {
        let h = &self.h;
        let d = t - s;
        let w = 1.0 + x.abs() + y.abs();
        let hx = 2e-3 * step_scale * d / w;
        let mut hs = 2e-3 * step_scale * d * d / (w * w);
        if s > 0.0 {
            hs = hs.min(0.05 * s);
        }
        let probe = [
            (s - 2.0 * hs, t, x, y),
            (s, t + 2.0 * hs, x, y),
            (s, t, x - 2.0 * hx, y),
            (s, t, x, y - 2.0 * hx),
        ];
        for &(a, b, c, e) in &probe {
            if !self.in_domain(a, b, c, e) {
                return Err(domain(format!(
                    "{}: finite-difference stencil leaves domain",
                    self.name
                )));
            }
        }
        // values at offsets −2, −1, 1, 2 along one coordinate
        let line =
            |f: &dyn Fn(f64) -> f64, step: f64| [f(-2.0 * step), f(-step), f(step), f(2.0 * step)];
        let first =
            |v: [f64; 4], step: f64| (v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * step);
        let second = |v: [f64; 4], f0: f64, step: f64| {
            (-v[0] + 16.0 * v[1] - 30.0 * f0 + 16.0 * v[2] - v[3]) / (12.0 * step * step)
        };
        let f0 = h(s, t, x, y);
        let vs = line(&|e| h(s + e, t, x, y), hs);
        let vt = line(&|e| h(s, t + e, x, y), hs);
        let vx = line(&|e| h(s, t, x + e, y), hx);
        let vy = line(&|e| h(s, t, x, y + e), hx);
        Ok(Derivs {
            s: first(vs, hs),
            t: first(vt, hs),
            x: first(vx, hx),
            y: first(vy, hx),
            xx: second(vx, f0, hx),
            yy: second(vy, f0, hx),
        })
    }

    /// Value of system (−): exact partials when available, otherwise
    /// central differences.
    pub fn residual_minus(&self, s: f64, t: f64, x: f64, y: f64) -> Result<f64> {
        let d = self.derivs(self.default_mode(), 1.0, s, t, x, y)?;
        Ok(self.terms(&d, s, t, x, y).0.iter().sum())
    }

    /// Value of system (+).
    pub fn residual_plus(&self, s: f64, t: f64, x: f64, y: f64) -> Result<f64> {
        let d = self.derivs(self.default_mode(), 1.0, s, t, x, y)?;
        Ok(self.terms(&d, s, t, x, y).1.iter().sum())
    }

    fn default_mode(&self) -> ResidualMode {
        if self.partials.is_some() {
            ResidualMode::Exact
        } else {
            ResidualMode::FiniteDifference
        }
    }

    /// Normalized (−) and (+) residuals.
    pub fn normalized_residuals(
        &self,
        mode: ResidualMode,
        s: f64,
        t: f64,
        x: f64,
        y: f64,
    ) -> Result<(f64, f64)> {
        self.normalized_residuals_with_step(mode, 1.0, s, t, x, y)
    }

    pub fn normalized_residuals_with_step(
        &self,
        mode: ResidualMode,
        step_scale: f64,
        s: f64,
        t: f64,
        x: f64,
        y: f64,
    ) -> Result<(f64, f64)> {
        let d = self.derivs(mode, step_scale, s, t, x, y)?;
        let (m, p) = self.terms(&d, s, t, x, y);
        Ok((normalize(&m), normalize(&p)))
    }

    /// Finite-difference derivatives (∂s, ∂t, ∂x, ∂y, ∂xx, ∂yy) at a step
    /// multiple of the default.
    pub fn fd_partials(&self, step_scale: f64, s: f64, t: f64, x: f64, y: f64) -> Result<[f64; 6]> {
        let d = self.fd_derivs(step_scale, s, t, x, y)?;
        Ok([d.s, d.t, d.x, d.y, d.xx, d.yy])
    }
}

fn normalize(terms: &[f64; 3]) -> f64 {
    let sum: f64 = terms.iter().sum();
    let scale: f64 = terms.iter().map(|v| v.abs()).sum();
    let r = sum.abs() / scale.max(1.0);
    if r.is_nan() {
        f64::INFINITY
    } else {
        r
    }
}

struct Derivs {
    s: f64,
    t: f64,
    x: f64,
    y: f64,
    xx: f64,
    yy: f64,
}

/// Sampling box for residual scans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRegion {
    pub time_max: f64,
    pub time_min: f64,
    pub min_gap: f64,
    pub space: f64,
}

impl Default for ResidualRegion {
    /// s, t in (0, 5) with t − s ≥ 0.1 and |x|, |y| ≤ 3.
    fn default() -> Self {
        Self {
            time_max: 5.0,
            time_min: 0.0,
            min_gap: 0.1,
            space: 3.0,
        }
    }
}

impl ResidualRegion {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64, f64, f64) {
        loop {
            let span = self.time_max - self.time_min;
            let a = self.time_min + span * rng.random::<f64>();
            let b = self.time_min + span * rng.random::<f64>();
            let (s, t) = if a < b { (a, b) } else { (b, a) };
            if t - s < self.min_gap || s <= 0.0 {
                continue;
            }
            let x = self.space * (2.0 * rng.random::<f64>() - 1.0);
            let y = self.space * (2.0 * rng.random::<f64>() - 1.0);
            return (s, t, x, y);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ResidualReport {
    pub max_abs_minus: f64,
    pub max_abs_plus: f64,
    pub points_checked: usize,
    /// Relative finite-difference step; `None` with exact partials.
    pub step: Option<f64>,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.max_abs_minus.max(self.max_abs_plus)
    }
}

/// Maximum normalized residuals over `points` random points of the region.
/// Points outside the candidate's domain are redrawn.
pub fn residual_scan<R: Rng + ?Sized>(
    h: &PFCandidate,
    rng: &mut R,
    points: usize,
    region: ResidualRegion,
    mode: ResidualMode,
) -> Result<ResidualReport> {
    let mut rep = ResidualReport {
        max_abs_minus: 0.0,
        max_abs_plus: 0.0,
        points_checked: 0,
        step: match mode {
            ResidualMode::Exact => None,
            ResidualMode::FiniteDifference => Some(2e-3),
        },
    };
    let mut attempts = 0usize;
    while rep.points_checked < points {
        attempts += 1;
        if attempts > 100 * points + 1000 {
            return Err(domain(format!(
                "{}: sampling region misses the domain",
                h.name()
            )));
        }
        let (s, t, x, y) = region.sample(rng);
        match h.normalized_residuals(mode, s, t, x, y) {
            Ok((m, p)) => {
                rep.max_abs_minus = rep.max_abs_minus.max(m);
                rep.max_abs_plus = rep.max_abs_plus.max(p);
                rep.points_checked += 1;
            }
            Err(crate::Error::Domain(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(rep)
}

/// Normalized residuals of e_s^{(t)}(x⃗, y⃗) = exp(−2⟨x⃗,y⃗⟩/(t−s)) in any
/// dimension, where the systems use gradients and Laplacians.
pub fn e_st_residuals(s: f64, t: f64, x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let h = crate::closed_forms::e_st(s, t, x, y)?;
    let d = t - s;
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let yy: f64 = y.iter().map(|v| v * v).sum();
    let xx: f64 = x.iter().map(|v| v * v).sum();
    let h_s = -2.0 * dot / (d * d) * h;
    let h_t = 2.0 * dot / (d * d) * h;
    // (y−x)·∇_x h and the Laplacian
    let drift_x: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - a) / d * (-2.0 * b / d) * h)
        .sum();
    let drift_y: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - a) / d * (-2.0 * a / d) * h)
        .sum();
    let lap_x = 4.0 * yy / (d * d) * h;
    let lap_y = 4.0 * xx / (d * d) * h;
    Ok((
        normalize(&[h_s, drift_x, 0.5 * lap_x]),
        normalize(&[-h_t, -drift_y, 0.5 * lap_y]),
    ))
}
