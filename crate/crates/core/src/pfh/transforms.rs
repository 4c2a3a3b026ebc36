//! The transform group acting on PFH functions. Exact partials are carried
//! through the chain rule whenever the input has them.

use std::sync::Arc;

use super::candidate::{Fn4, PFCandidate, Partials};

/// ĥ(s,t;x,y) = h(1/t, 1/s; y/t, x/s), defined for s > 0.
pub fn transform_time_inversion(h: &PFCandidate) -> PFCandidate {
    let f = h.raw().clone();
    let dom = h.domain_fn().clone();
    let mut out = PFCandidate::new(format!("inv({})", h.name()), move |s, t, x, y| {
        f(1.0 / t, 1.0 / s, y / t, x / s)
    })
    .with_domain(move |s, t, x, y| s > 0.0 && dom(1.0 / t, 1.0 / s, y / t, x / s));
    if let Some(p) = h.partials() {
        let p = p.clone();
        let at = |g: &Fn4, s: f64, t: f64, x: f64, y: f64| g(1.0 / t, 1.0 / s, y / t, x / s);
        // with S = 1/t, T = 1/s, X = y/t, Y = x/s
        let (d_t, d_y) = (p.t.clone(), p.y.clone());
        let hs: Fn4 = Arc::new(move |s, t, x, y| {
            -(at(&d_t, s, t, x, y) + x * at(&d_y, s, t, x, y)) / (s * s)
        });
        let (d_s, d_x) = (p.s.clone(), p.x.clone());
        let ht: Fn4 = Arc::new(move |s, t, x, y| {
            -(at(&d_s, s, t, x, y) + y * at(&d_x, s, t, x, y)) / (t * t)
        });
        let (qy, qx) = (p.y.clone(), p.x.clone());
        let hx: Fn4 = Arc::new(move |s, t, x, y| at(&qy, s, t, x, y) / s);
        let hy: Fn4 = Arc::new(move |s, t, x, y| at(&qx, s, t, x, y) / t);
        let (qyy, qxx) = (p.yy.clone(), p.xx.clone());
        let hxx: Fn4 = Arc::new(move |s, t, x, y| at(&qyy, s, t, x, y) / (s * s));
        let hyy: Fn4 = Arc::new(move |s, t, x, y| at(&qxx, s, t, x, y) / (t * t));
        out = out.with_partials(Partials {
            s: hs,
            t: ht,
            x: hx,
            y: hy,
            xx: hxx,
            yy: hyy,
        });
    }
    out
}

/// f(s,t;x,y) = h(s, t; x+νs+l, y+νt+l).
pub fn transform_drift_shift(h: &PFCandidate, nu: f64, l: f64) -> PFCandidate {
    let f = h.raw().clone();
    let dom = h.domain_fn().clone();
    let mut out = PFCandidate::new(
        format!("shift({}, nu={nu}, l={l})", h.name()),
        move |s, t, x, y| f(s, t, x + nu * s + l, y + nu * t + l),
    )
    .with_domain(move |s, t, x, y| dom(s, t, x + nu * s + l, y + nu * t + l));
    if let Some(p) = h.partials() {
        let at =
            move |g: &Fn4, s: f64, t: f64, x: f64, y: f64| g(s, t, x + nu * s + l, y + nu * t + l);
        let (a, b) = (p.s.clone(), p.x.clone());
        let hs: Fn4 = Arc::new(move |s, t, x, y| at(&a, s, t, x, y) + nu * at(&b, s, t, x, y));
        let (a, b) = (p.t.clone(), p.y.clone());
        let ht: Fn4 = Arc::new(move |s, t, x, y| at(&a, s, t, x, y) + nu * at(&b, s, t, x, y));
        let wrap = |g: &Fn4| -> Fn4 {
            let g = g.clone();
            Arc::new(move |s, t, x, y| at(&g, s, t, x, y))
        };
        out = out.with_partials(Partials {
            s: hs,
            t: ht,
            x: wrap(&p.x),
            y: wrap(&p.y),
            xx: wrap(&p.xx),
            yy: wrap(&p.yy),
        });
    }
    out
}

/// f(s,t;x,y) = h(a²s, a²t; ax, ay), a > 0.
pub fn transform_scale(h: &PFCandidate, a: f64) -> crate::Result<PFCandidate> {
    crate::error::ensure(a > 0.0, || format!("scale must be positive, got {a}"))?;
    let a2 = a * a;
    let f = h.raw().clone();
    let dom = h.domain_fn().clone();
    let mut out = PFCandidate::new(format!("scale({}, a={a})", h.name()), move |s, t, x, y| {
        f(a2 * s, a2 * t, a * x, a * y)
    })
    .with_domain(move |s, t, x, y| dom(a2 * s, a2 * t, a * x, a * y));
    if let Some(p) = h.partials() {
        let wrap = |g: &Fn4, c: f64| -> Fn4 {
            let g = g.clone();
            Arc::new(move |s, t, x, y| c * g(a2 * s, a2 * t, a * x, a * y))
        };
        out = out.with_partials(Partials {
            s: wrap(&p.s, a2),
            t: wrap(&p.t, a2),
            x: wrap(&p.x, a),
            y: wrap(&p.y, a),
            xx: wrap(&p.xx, a2),
            yy: wrap(&p.yy, a2),
        });
    }
    Ok(out)
}

/// A function of (u, z) shared across threads.
pub type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// h(s,t;x,y) = φ(1/(t−s), (y−x)/(t−s)) for a space-time harmonic φ(u,z),
/// i.e. φ_u + ½φ_zz = 0. `partials` gives (φ_u, φ_z, φ_zz) when known.
pub fn from_spacetime_harmonic<F>(
    name: &str,
    phi: F,
    partials: Option<(Fn2, Fn2, Fn2)>,
) -> PFCandidate
where
    F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
{
    let uz = |s: f64, t: f64, x: f64, y: f64| {
        let d = t - s;
        (1.0 / d, (y - x) / d, d)
    };
    let mut out = PFCandidate::new(name.to_string(), move |s, t, x, y| {
        let (u, z, _) = uz(s, t, x, y);
        phi(u, z)
    });
    if let Some((pu, pz, pzz)) = partials {
        // U_s = 1/D², Z_s = (y−x)/D², U_t = −U_s, Z_t = −Z_s, Z_x = −1/D, Z_y = 1/D
        let (a, b) = (pu.clone(), pz.clone());
        let hs: Fn4 = Arc::new(move |s, t, x, y| {
            let (u, z, d) = uz(s, t, x, y);
            (a(u, z) + b(u, z) * (y - x)) / (d * d)
        });
        let (a, b) = (pu, pz.clone());
        let ht: Fn4 = Arc::new(move |s, t, x, y| {
            let (u, z, d) = uz(s, t, x, y);
            -(a(u, z) + b(u, z) * (y - x)) / (d * d)
        });
        let b = pz.clone();
        let hx: Fn4 = Arc::new(move |s, t, x, y| {
            let (u, z, d) = uz(s, t, x, y);
            -b(u, z) / d
        });
        let b = pz;
        let hy: Fn4 = Arc::new(move |s, t, x, y| {
            let (u, z, d) = uz(s, t, x, y);
            b(u, z) / d
        });
        let hzz: Fn4 = Arc::new(move |s, t, x, y| {
            let (u, z, d) = uz(s, t, x, y);
            pzz(u, z) / (d * d)
        });
        out = out.with_partials(Partials {
            s: hs,
            t: ht,
            x: hx,
            y: hy,
            xx: hzz.clone(),
            yy: hzz,
        });
    }
    out
}

/// The exponential kernel φ(u,z) = exp(λz − λ²u/2) as a candidate.
pub fn exponential_kernel(lambda: f64) -> PFCandidate {
    let l = lambda;
    let phi = move |u: f64, z: f64| (l * z - 0.5 * l * l * u).exp();
    from_spacetime_harmonic(
        &format!("kernel(lambda={lambda})"),
        phi,
        Some((
            Arc::new(move |u, z| -0.5 * l * l * phi(u, z)),
            Arc::new(move |u, z| l * phi(u, z)),
            Arc::new(move |u, z| l * l * phi(u, z)),
        )),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::DriftLevel;
    use crate::pfh::{residual_scan, ResidualMode, ResidualRegion};
    use crate::rng::RngStream;

    fn max_exact(c: &PFCandidate, seed: u64) -> f64 {
        let mut r = RngStream::new(seed, 0);
        residual_scan(
            c,
            &mut r,
            2000,
            ResidualRegion::default(),
            ResidualMode::Exact,
        )
        .unwrap()
        .max()
    }

    #[test]
    fn double_inversion_is_identity() {
        let h = PFCandidate::lnu(DriftLevel::new(0.3, -0.2));
        let hh = transform_time_inversion(&transform_time_inversion(&h));
        let mut r = RngStream::new(3, 0);
        for _ in 0..1000 {
            let (s, t, x, y) = ResidualRegion::default().sample(&mut r);
            let a = h.eval(s, t, x, y).unwrap();
            let b = hh.eval(s, t, x, y).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} {b}");
        }
    }

    #[test]
    fn inversion_swaps_level_and_drift() {
        // ĥ^{(l,ν)} is h with level −ν and drift −l
        let (l, nu) = (0.4, -0.7);
        let inv = transform_time_inversion(&PFCandidate::lnu(DriftLevel::new(nu, l)));
        let swapped = PFCandidate::lnu(DriftLevel::new(-l, -nu));
        let mut r = RngStream::new(4, 0);
        for _ in 0..1000 {
            let (s, t, x, y) = ResidualRegion::default().sample(&mut r);
            let a = inv.eval(s, t, x, y).unwrap();
            let b = swapped.eval(s, t, x, y).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} {b}");
        }
    }

    #[test]
    fn transforms_preserve_exact_residuals() {
        let h = PFCandidate::lnu(DriftLevel::new(0.5, 0.2));
        assert!(max_exact(&transform_time_inversion(&h), 5) < 1e-10);
        assert!(max_exact(&transform_drift_shift(&h, -0.3, 0.7), 6) < 1e-10);
        assert!(max_exact(&transform_scale(&h, 1.7).unwrap(), 7) < 1e-10);
        assert!(max_exact(&exponential_kernel(0.8), 8) < 1e-10);
        assert!(transform_scale(&h, 0.0).is_err());
    }

    #[test]
    fn kernel_equals_harness() {
        let k = exponential_kernel(1.2);
        let h = PFCandidate::harness(1.2);
        let a = k.eval(0.3, 1.4, 0.2, -0.5).unwrap();
        let b = h.eval(0.3, 1.4, 0.2, -0.5).unwrap();
        assert!((a - b).abs() < 1e-14 * a);
    }

    #[test]
    fn chained_transforms_pass_fd_residuals() {
        let h = PFCandidate::lnu(DriftLevel::new(-0.5, 0.3));
        let c = transform_time_inversion(
            &transform_scale(&transform_drift_shift(&h, 0.2, -0.1), 1.3).unwrap(),
        );
        let stripped = PFCandidate::new("fd only", {
            let c = c.clone();
            move |s, t, x, y| c.eval(s, t, x, y).unwrap_or(f64::NAN)
        })
        .with_domain(|s, _, _, _| s > 0.0);
        let mut r = RngStream::new(9, 0);
        let rep = residual_scan(
            &stripped,
            &mut r,
            2000,
            ResidualRegion::default(),
            ResidualMode::FiniteDifference,
        )
        .unwrap();
        assert!(rep.max() < 1e-6, "{rep:?}");
    }
}
