//! Sample statistics: Monte Carlo estimates, empirical distributions,
//! Kolmogorov–Smirnov tests and rank correlation.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Sample mean with its standard error `sample_std/√n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl McEstimate {
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 2 {
            return Err(Error::EmptySample);
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
        let var = ss / (n - 1) as f64;
        Ok(Self {
            mean,
            std_error: (var / n as f64).sqrt(),
            n,
        })
    }

    /// Estimate of E[f(X)] from samples of X.
    pub fn of<F: Fn(f64) -> f64>(xs: &[f64], f: F) -> Result<Self> {
        let v: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        Self::from_samples(&v)
    }

    /// Estimate of a proportion.
    pub fn from_bools(hits: &[bool]) -> Result<Self> {
        let v: Vec<f64> = hits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Self::from_samples(&v)
    }

    /// (mean − target)/std_error; infinite when the estimate is exact but off.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = self.mean - target;
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            d.signum() * f64::INFINITY
        }
    }

    /// Difference of two independent estimates.
    pub fn minus(&self, other: &McEstimate) -> McEstimate {
        McEstimate {
            mean: self.mean - other.mean,
            std_error: self.std_error.hypot(other.std_error),
            n: self.n.min(other.n),
        }
    }

    pub fn scale(&self, c: f64) -> McEstimate {
        McEstimate {
            mean: c * self.mean,
            std_error: c.abs() * self.std_error,
            n: self.n,
        }
    }
}

/// Sorted sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySample);
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::Domain("NaN in sample set".into()));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { sorted: samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of samples ≤ x.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    /// Lower empirical quantile.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let idx = ((p.clamp(0.0, 1.0) * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.sorted[idx]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Survival function of the Kolmogorov distribution, P(K > λ).
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // theta-function form converges fast for small λ
        let mut cdf = 0.0;
        for k in 1..=20 {
            let m = (2 * k - 1) as f64;
            cdf += (-m * m * PI * PI / (8.0 * lambda * lambda)).exp();
        }
        cdf *= (2.0 * PI).sqrt() / lambda;
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let mut sf = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sf += if k % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * sf).clamp(0.0, 1.0)
    }
}

fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let sn = n_eff.sqrt();
    kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)
}

/// One-sample two-sided KS test against a CDF, which may have atoms.
pub fn ks_statistic<F: Fn(f64) -> f64>(emp: &EmpiricalDistribution, cdf: F) -> Result<KsResult> {
    let n = emp.len();
    if n < 10 {
        return Err(Error::Domain(format!(
            "KS needs at least 10 samples, got {n}"
        )));
    }
    let nf = n as f64;
    let xs = emp.samples();
    let mut d: f64 = 0.0;
    let mut i = 0;
    // tie blocks are compared at both ends so that CDFs with atoms work
    while i < n {
        let x = xs[i];
        let mut j = i;
        while j + 1 < n && xs[j + 1] == x {
            j += 1;
        }
        let f = cdf(x).clamp(0.0, 1.0);
        let f_left = cdf(x.next_down()).clamp(0.0, 1.0);
        d = d.max((f - (j + 1) as f64 / nf).abs());
        d = d.max((f_left - i as f64 / nf).abs());
        i = j + 1;
    }
    Ok(KsResult {
        statistic: d,
        p_value: ks_p_value(d, nf),
        n,
    })
}

/// Two-sample two-sided KS test.
pub fn ks_two_sample(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> Result<KsResult> {
    let (xa, xb) = (a.samples(), b.samples());
    if xa.len() < 10 || xb.len() < 10 {
        return Err(Error::Domain(
            "KS needs at least 10 samples per side".into(),
        ));
    }
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(KsResult {
        statistic: d,
        p_value: ks_p_value(d, na * nb / (na + nb)),
        n: xa.len().min(xb.len()),
    })
}

/// Average ranks (1-based), ties share their mean rank.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman rank correlation. Under independence it is ≈ N(0, 1/n).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::Domain("spearman needs paired samples, n ≥ 3".into()));
    }
    Ok(pearson(&ranks(x), &ranks(y)))
}

/// Sample skewness and excess kurtosis.
pub fn skew_kurtosis(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in xs {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_reference_points() {
        // classical critical values
        assert!((kolmogorov_sf(1.358_099) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.627_624) - 0.01).abs() < 1e-4);
        // both branches agree at the switch
        let a = kolmogorov_sf(1.0 - 1e-12);
        let b = kolmogorov_sf(1.0);
        assert!((a - b).abs() < 1e-10);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn mc_estimate_basic() {
        let e = McEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(e.mean, 2.5);
        assert!((e.std_error - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(McEstimate::from_samples(&[1.0]).is_err());
    }

    #[test]
    fn empirical_cdf_and_quantile() {
        let e = EmpiricalDistribution::new(vec![3.0, 1.0, 2.0, 4.0]).unwrap();
        assert_eq!(e.cdf(0.5), 0.0);
        assert_eq!(e.cdf(2.0), 0.5);
        assert_eq!(e.cdf(9.0), 1.0);
        assert_eq!(e.quantile(0.5), 2.0);
        assert!(EmpiricalDistribution::new(vec![]).is_err());
    }

    #[test]
    fn constant_sample_rejected_by_ks() {
        let e = EmpiricalDistribution::new(vec![0.5; 1000]).unwrap();
        let r = ks_statistic(&e, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn ks_exact_grid_passes() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let e = EmpiricalDistribution::new(xs).unwrap();
        let r = ks_statistic(&e, |x| x).unwrap();
        assert!((r.statistic - 0.5 / n as f64).abs() < 1e-12);
        assert!(r.p_value > 0.99);
    }

    #[test]
    fn atom_at_zero_is_handled() {
        // half the mass at 0, the rest uniform on (0, 1)
        let n = 1000;
        let mut xs = vec![0.0; n / 2];
        xs.extend((0..n / 2).map(|i| (i as f64 + 0.5) / (n / 2) as f64));
        let e = EmpiricalDistribution::new(xs).unwrap();
        let r = ks_statistic(&e, |x| if x < 0.0 { 0.0 } else { 0.5 + 0.5 * x.min(1.0) }).unwrap();
        assert!(r.statistic < 1e-3, "{r:?}");
    }

    #[test]
    fn two_sample_identical() {
        let xs: Vec<f64> = (0..100).map(f64::from).collect();
        let a = EmpiricalDistribution::new(xs.clone()).unwrap();
        let r = ks_two_sample(&a, &a.clone()).unwrap();
        assert_eq!(r.statistic, 0.0);
        let shifted = EmpiricalDistribution::new(xs.iter().map(|x| x + 50.0).collect()).unwrap();
        let r = ks_two_sample(&a, &shifted).unwrap();
        assert!((r.statistic - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ranks_handle_ties() {
        assert_eq!(ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&x, &[1.0, 4.0, 9.0, 16.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((spearman(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
    }
}
