//! Closed-form evaluators. Everything here is deterministic; Monte Carlo
//! counterparts live in the checking modules.

use serde::Serialize;
use std::f64::consts::{FRAC_2_PI, PI};

use crate::error::{domain, ensure, Result};
use crate::quad::{integrate, integrate_real_line, integrate_to_infinity, quad, QuadOptions};
use crate::special::{gauss_integral, heat_kernel, norm_cdf, prob_abs_normal_le, SQRT_2PI};

/// Drift ν and level l of a drifted Brownian motion; geometric callers use
/// K = e^l.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftLevel {
    pub nu: f64,
    pub l: f64,
}

impl DriftLevel {
    pub fn new(nu: f64, l: f64) -> Self {
        Self { nu, l }
    }

    pub fn from_strike(nu: f64, k: f64) -> Result<Self> {
        ensure(k > 0.0, || format!("strike must be positive, got {k}"))?;
        Ok(Self { nu, l: k.ln() })
    }

    pub fn strike(&self) -> f64 {
        self.l.exp()
    }
}

fn check_window(s: f64, t: f64) -> Result<()> {
    ensure(s < t, || format!("need s < t, got s = {s}, t = {t}"))
}

/// Probability that a Brownian bridge from 0 to m over [0, u] reaches λ.
pub fn bridge_hit_prob(lambda: f64, m: f64, u: f64) -> Result<f64> {
    ensure(u > 0.0, || {
        format!("bridge length must be positive, got {u}")
    })?;
    let e = 2.0 * lambda * (lambda - m);
    Ok((-e.max(0.0) / u).exp())
}

/// Density of the first hitting time of λ ≠ 0 by the bridge 0 → m on [0, u].
pub fn bridge_hit_time_density(lambda: f64, t: f64, u: f64, m: f64) -> Result<f64> {
    ensure(lambda != 0.0, || "level must be non-zero".into())?;
    ensure(t > 0.0 && t < u, || {
        format!("need 0 < t < u, got t = {t}, u = {u}")
    })?;
    Ok(
        lambda.abs() / t * heat_kernel(t, 0.0, lambda) * heat_kernel(u - t, lambda, m)
            / heat_kernel(u, 0.0, m),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopedSup {
    pub value: f64,
    /// False when λ > 0 and λ(a+b) > m do not both hold; `value` is then
    /// the formula clamped to 1.
    pub in_domain: bool,
}

/// P(sup_{t≤1} B_t/(a+bt) > λ | B₁ = m).
pub fn sloped_sup_prob(a: f64, b: f64, lambda: f64, m: f64) -> Result<SlopedSup> {
    ensure(a > 0.0, || format!("intercept must be positive, got {a}"))?;
    let in_domain = lambda > 0.0 && lambda * (a + b) > m;
    let value = (-2.0 * lambda * a * (lambda * (a + b) - m)).exp().min(1.0);
    Ok(SlopedSup { value, in_domain })
}

/// Azéma-type probability that the drifted path avoids l on (s, t) given its
/// endpoints, written in driftless coordinates.
pub fn sigma_pf(s: f64, t: f64, x: f64, y: f64, lvl: DriftLevel) -> Result<f64> {
    check_window(s, t)?;
    let p = (x + lvl.nu * s - lvl.l) * (y + lvl.nu * t - lvl.l);
    if p <= 0.0 {
        return Ok(0.0);
    }
    Ok(-(-2.0 * p / (t - s)).exp_m1())
}

/// exp(−2(x+νs−l)(y+νt−l)/(t−s)).
pub fn h_pfh_lnu(s: f64, t: f64, x: f64, y: f64, lvl: DriftLevel) -> Result<f64> {
    check_window(s, t)?;
    Ok((-2.0 * (x + lvl.nu * s - lvl.l) * (y + lvl.nu * t - lvl.l) / (t - s)).exp())
}

/// exp(a(y−x)/(t−s) − a²/(2(t−s))).
pub fn h_pfh_harness(s: f64, t: f64, x: f64, y: f64, a: f64) -> Result<f64> {
    check_window(s, t)?;
    let d = t - s;
    Ok((a * (y - x) / d - a * a / (2.0 * d)).exp())
}

/// exp(−2⟨x, y⟩/(t−s)) for n-dimensional endpoints.
pub fn e_st(s: f64, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    check_window(s, t)?;
    ensure(x.len() == y.len() && !x.is_empty(), || {
        format!("dimension mismatch: {} vs {}", x.len(), y.len())
    })?;
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    Ok((-2.0 * dot / (t - s)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
enum LawKind {
    Driftless,
    Drifted { nu: f64 },
}

/// Law of the last visit g of level x before t by a (possibly drifted)
/// Brownian motion from 0: an atom at 0 (no visit) plus a density on (0, t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubProbabilityLaw {
    x: f64,
    t: f64,
    kind: LawKind,
}

/// Last-zero law of B − x before t.
pub fn g0_law(x: f64, t: f64) -> Result<SubProbabilityLaw> {
    ensure(t > 0.0, || format!("horizon must be positive, got {t}"))?;
    Ok(SubProbabilityLaw {
        x,
        t,
        kind: LawKind::Driftless,
    })
}

/// Same for B + νt. The Girsanov factor exp(νx − ν²t/2) is folded into the
/// density so that the law normalizes.
pub fn g_nu_law(x: f64, nu: f64, t: f64) -> Result<SubProbabilityLaw> {
    ensure(t > 0.0, || format!("horizon must be positive, got {t}"))?;
    let kind = if nu == 0.0 {
        LawKind::Driftless
    } else {
        LawKind::Drifted { nu }
    };
    Ok(SubProbabilityLaw { x, t, kind })
}

impl SubProbabilityLaw {
    pub fn horizon(&self) -> f64 {
        self.t
    }

    /// P(g = 0), the level is never reached before t.
    pub fn atom(&self) -> f64 {
        let (x, t) = (self.x, self.t);
        match self.kind {
            LawKind::Driftless => prob_abs_normal_le(x.abs() / t.sqrt()),
            LawKind::Drifted { nu } => {
                if x == 0.0 {
                    return 0.0;
                }
                let a = x.abs();
                let n = nu * x.signum();
                let st = t.sqrt();
                let reflected = (2.0 * n * a).exp() * norm_cdf((-a - n * t) / st);
                let v = norm_cdf((a - n * t) / st)
                    - if reflected.is_finite() {
                        reflected
                    } else {
                        0.0
                    };
                v.clamp(0.0, 1.0)
            }
        }
    }

    /// Density divided by the arcsine kernel 1/(π√(u(t−u))).
    fn weight(&self, u: f64) -> f64 {
        let base = if u > 0.0 {
            (-self.x * self.x / (2.0 * u)).exp()
        } else {
            0.0
        };
        match self.kind {
            LawKind::Driftless => base,
            LawKind::Drifted { nu } => {
                let pre = nu * self.x - 0.5 * nu * nu * self.t;
                base * (pre).exp() * phi_psi(nu * (self.t - u).max(0.0).sqrt())
            }
        }
    }

    pub fn density(&self, u: f64) -> f64 {
        if u <= 0.0 || u >= self.t {
            return 0.0;
        }
        self.weight(u) / (PI * (u * (self.t - u)).sqrt())
    }

    /// P(g ≤ u), including the atom.
    pub fn cdf(&self, u: f64) -> Result<f64> {
        if u < 0.0 {
            return Ok(0.0);
        }
        let t = self.t;
        let theta = (u.min(t) / t).sqrt().asin();
        // u = t·sin²θ removes both endpoint singularities
        let body = quad(|th| self.weight(t * th.sin().powi(2)), 0.0, theta)?;
        Ok((self.atom() + FRAC_2_PI * body).min(1.0))
    }

    /// Atom plus total density mass; equals 1 up to quadrature error.
    pub fn total_mass(&self) -> Result<f64> {
        let t = self.t;
        let body = quad(|th| self.weight(t * th.sin().powi(2)), 0.0, PI / 2.0)?;
        Ok(self.atom() + FRAC_2_PI * body)
    }
}

/// φ(λ) = E[cosh(λ√(2𝐞))] = 1 + √(π/2)|λ|e^{λ²/2}P(|N| ≤ |λ|).
pub fn phi_psi(lambda: f64) -> f64 {
    let a = lambda.abs();
    if a == 0.0 {
        return 1.0;
    }
    1.0 + (PI / 2.0).sqrt() * a * (0.5 * a * a).exp() * prob_abs_normal_le(a)
}

/// E[f(ℰ_t) | 𝒢₁(t)] as a function of λ = √(t − 𝒢₁(t)), for ℰ_t = exp(B_t − t/2).
pub fn conditional_given_g<F: Fn(f64) -> f64>(lambda: f64, f: F) -> Result<f64> {
    ensure(lambda >= 0.0, || {
        format!("λ must be non-negative, got {lambda}")
    })?;
    if lambda == 0.0 {
        return Ok(f(1.0));
    }
    let opts = QuadOptions {
        abs_tol: 1e-12,
        ..QuadOptions::default()
    };
    let w = |mu: f64| 0.5 * mu.abs() * (-0.5 * mu * mu - 0.5 * lambda * mu).exp();
    let num = integrate_real_line(
        |mu| {
            let wm = w(mu);
            if wm == 0.0 {
                0.0
            } else {
                wm * f((lambda * mu).exp())
            }
        },
        opts,
    )?;
    let den = integrate_real_line(w, opts)?;
    Ok(num.value / den.value)
}

/// Black–Scholes call E[(ℰ_t − K)⁺] with unit volatility, zero rate, spot 1.
pub fn bs_call_gbm(t: f64, k: f64) -> Result<f64> {
    ensure(t > 0.0 && k > 0.0, || {
        format!("need t, K > 0, got {t}, {k}")
    })?;
    let st = t.sqrt();
    let d1 = (-k.ln() + 0.5 * t) / st;
    Ok(norm_cdf(d1) - k * norm_cdf(d1 - st))
}

/// Black–Scholes put E[(K − ℰ_t)⁺].
pub fn bs_put_gbm(t: f64, k: f64) -> Result<f64> {
    ensure(t > 0.0 && k > 0.0, || {
        format!("need t, K > 0, got {t}, {k}")
    })?;
    let st = t.sqrt();
    let d1 = (-k.ln() + 0.5 * t) / st;
    Ok(k * norm_cdf(st - d1) - norm_cdf(-d1))
}

/// First passage density at s of level a > 0 by B_u + νu, ν ≥ 0.
fn ig_density(a: f64, nu: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let d = a - nu * s;
    a / (2.0 * PI * s * s * s).sqrt() * (-d * d / (2.0 * s)).exp()
}

/// P(G ≤ t) for G the last passage of B_u + u/2 at ln K, computed from the
/// decomposition G = T + Ñ²/ν² (first passage, then the last return from
/// the level). It coincides with the Black–Scholes call value.
pub fn last_passage_cdf_g(t: f64, k: f64) -> Result<f64> {
    ensure(t > 0.0 && k > 0.0, || {
        format!("need t, K > 0, got {t}, {k}")
    })?;
    let a = k.ln().abs();
    let tail = |r: f64| prob_abs_normal_le(r.max(0.0).sqrt() / 2.0);
    if a == 0.0 {
        return Ok(tail(t));
    }
    let conv = integrate(
        |s| ig_density(a, 0.5, s) * tail(t - s),
        0.0,
        t,
        QuadOptions::with_abs_tol(1e-12),
    )?;
    Ok((1.0 - k).max(0.0) + k.min(1.0) * conv.value)
}

/// E[L_t^K(ℰ)], the expected local time of ℰ at K up to t.
pub fn expected_local_time_gbm(k: f64, t: f64) -> Result<f64> {
    ensure(t > 0.0 && k > 0.0, || {
        format!("need t, K > 0, got {t}, {k}")
    })?;
    let l = k.ln();
    // s = w² removes the 1/√s singularity
    let v = integrate(
        |w| {
            if w == 0.0 {
                return if l == 0.0 { 2.0 / SQRT_2PI } else { 0.0 };
            }
            2.0 / SQRT_2PI * (-w * w / 8.0 - l * l / (2.0 * w * w)).exp()
        },
        0.0,
        t.sqrt(),
        QuadOptions::with_abs_tol(1e-12),
    )?;
    Ok(k.sqrt() * v.value)
}

/// E[exp(−λ²G_K/2)] for the last passage at K of Brownian motion from 1
/// killed at 0, 0 < K < 1.
pub fn laplace_gk_killed_bm(lambda: f64, k: f64) -> Result<f64> {
    ensure(lambda > 0.0, || format!("λ must be positive, got {lambda}"))?;
    ensure(k > 0.0 && k < 1.0, || format!("need 0 < K < 1, got {k}"))?;
    Ok(((-lambda * (1.0 - k)).exp() - (-lambda * (1.0 + k)).exp()) / (2.0 * lambda * k))
}

/// Same for M = 1/R with R a BES(3) from 1; defined for 0 < K ≤ 1 only.
pub fn laplace_gk_inv_bes3(lambda: f64, k: f64) -> Result<f64> {
    ensure(lambda > 0.0, || format!("λ must be positive, got {lambda}"))?;
    ensure(k > 0.0 && k <= 1.0, || format!("need 0 < K ≤ 1, got {k}"))?;
    let c = 1.0 / k;
    Ok(((-lambda * (c - 1.0)).exp() - (-lambda * (c + 1.0)).exp()) / (2.0 * lambda))
}

/// P(G_a^{(−ν)} > 0) = e^{−2νa}: drift −ν Brownian motion ever reaches a.
pub fn cameron_martin_atom(a: f64, nu: f64) -> Result<f64> {
    ensure(a > 0.0 && nu > 0.0, || {
        format!("need a, ν > 0, got {a}, {nu}")
    })?;
    Ok((-2.0 * nu * a).exp())
}

/// ρ(u) = (1 − e^{−2u²})/(2u) − ∫_u^{2u} e^{−x²/2} dx.
pub fn rho(u: f64) -> Result<f64> {
    ensure(u > 0.0, || format!("u must be positive, got {u}"))?;
    Ok(-(-2.0 * u * u).exp_m1() / (2.0 * u) - gauss_integral(u, 2.0 * u))
}

/// r(t) = E[(1/X_t − 1)⁺] for X a BES(3) from 1.
pub fn r_of_t(t: f64) -> Result<f64> {
    ensure(t > 0.0, || format!("t must be positive, got {t}"))?;
    Ok(FRAC_2_PI.sqrt() * rho(1.0 / t.sqrt())?)
}

/// Coefficient r_n of the large-t expansion of r.
pub fn r_coefficient(n: u32) -> f64 {
    let nf = f64::from(n);
    let fact: f64 = (1..=n).map(f64::from).product();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign / (fact * (2.0 * nf + 1.0)) * (0.5f64.powi(n as i32) - 2f64.powi(n as i32) / (nf + 1.0))
}

/// Truncated series √(2/(πt))·Σ_{n<n_terms} r_n t^{−n}.
pub fn r_series(t: f64, n_terms: u32) -> Result<f64> {
    ensure(t > 0.0, || format!("t must be positive, got {t}"))?;
    let sum: f64 = (0..n_terms)
        .map(|n| r_coefficient(n) / t.powi(n as i32))
        .sum();
    Ok((2.0 / (PI * t)).sqrt() * sum)
}

/// λ∫₀^∞ e^{−λt} r(t) dt.
pub fn r_laplace(lambda: f64) -> Result<f64> {
    ensure(lambda > 0.0, || format!("λ must be positive, got {lambda}"))?;
    let q = (2.0 * lambda).sqrt();
    Ok(-(-2.0 * q).exp_m1() / (2.0 * q) - (-q).exp())
}

/// E[e^{−λR̃}] for R̃ with density 3r.
pub fn rtilde_laplace(lambda: f64) -> Result<f64> {
    ensure(lambda > 0.0, || format!("λ must be positive, got {lambda}"))?;
    let q = (2.0 * lambda).sqrt();
    Ok(3.0 * (-(-2.0 * q).exp_m1() - 2.0 * q * (-q).exp()) / q.powi(3))
}

/// ∫₀^∞ r(t) dt by quadrature.
pub fn r_integral() -> Result<f64> {
    Ok(integrate_to_infinity(
        |t| {
            if t > 0.0 {
                r_of_t(t).unwrap_or(0.0)
            } else {
                0.0
            }
        },
        0.0,
        QuadOptions::default(),
    )?
    .value)
}

pub fn asian_a1() -> f64 {
    1.0
}

/// a₂(t) = 2(e^t − 1 − t)/t².
pub fn asian_a2(t: f64) -> Result<f64> {
    ensure(t > 0.0, || format!("t must be positive, got {t}"))?;
    if t < 1e-3 {
        return Ok(1.0 + t / 3.0 + t * t / 12.0 + t * t * t / 60.0);
    }
    Ok(2.0 * (t.exp_m1() - t) / (t * t))
}

/// ∫₀^∞ e^{−αt} tⁿ a_n(t) dt = n!/(α·∏_{k=1}^n (α − k(k−1)/2)).
pub fn asian_laplace_atilde(alpha: f64, n: u32) -> Result<f64> {
    ensure(n >= 1, || "n must be at least 1".into())?;
    let edge = f64::from(n) * f64::from(n - 1) / 2.0;
    ensure(alpha > edge, || format!("need α > {edge}, got {alpha}"))?;
    let mut den = alpha;
    let mut fact = 1.0;
    for k in 1..=n {
        den *= alpha - f64::from(k) * f64::from(k - 1) / 2.0;
        fact *= f64::from(k);
    }
    Ok(fact / den)
}

/// C(s₁,…,s_n) = Σ_{j<n} (n−j)(n−j−1)(s_{j+1} − s_j), s₀ = 0.
pub fn c_quadratic(s: &[f64]) -> Result<f64> {
    let n = s.len();
    let mut prev = 0.0;
    let mut c = 0.0;
    for (j, &sj) in s.iter().enumerate() {
        if sj < prev || sj.is_nan() {
            return Err(domain(format!("times must be ordered and ≥ 0, got {s:?}")));
        }
        let w = ((n - j) * (n - j - 1)) as f64;
        c += w * (sj - prev);
        prev = sj;
    }
    Ok(c)
}
