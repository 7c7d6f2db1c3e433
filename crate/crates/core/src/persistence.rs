//! Survival curves `P(l(0, T] <= a) = P(L_a > T)`, power-law exponent fits
//! and the closed-form Brownian oracle.

use std::io::Write;

use serde::{Deserialize, Serialize};
use libm::erf;

use crate::error::{Error, Result};
use crate::generators::SamplePath;
use crate::localtime::{persistence_indicator, LocalTimeProfile};

/// Two-sided 95% normal quantile used for the Wilson intervals.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceCurve {
    pub t_grid: Vec<f64>,
    pub survival: Vec<f64>,
    pub counts: Vec<u64>,
    pub n_paths: u64,
    pub threshold: f64,
}

impl PersistenceCurve {
    /// Builds a curve from event counts.
    pub fn from_counts(t_grid: Vec<f64>, counts: Vec<u64>, n_paths: u64, threshold: f64) -> Result<Self> {
        if n_paths == 0 {
            return Err(Error::InvalidInput("empty ensemble".into()));
        }
        if t_grid.len() != counts.len() {
            return Err(Error::InvalidInput("T grid and counts differ in length".into()));
        }
        if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("T grid must be increasing".into()));
        }
        if counts.iter().any(|&c| c > n_paths) {
            return Err(Error::InvalidInput("count exceeds number of paths".into()));
        }
        let survival = counts.iter().map(|&c| c as f64 / n_paths as f64).collect();
        Ok(Self {
            t_grid,
            survival,
            counts,
            n_paths,
            threshold,
        })
    }

    /// Normal-approximation standard error of each survival value.
    pub fn standard_errors(&self) -> Vec<f64> {
        let n = self.n_paths as f64;
        self.survival.iter().map(|&s| (s * (1.0 - s) / n).sqrt()).collect()
    }

    /// 95% Wilson score intervals.
    pub fn wilson_intervals(&self) -> Vec<(f64, f64)> {
        self.counts
            .iter()
            .map(|&c| wilson_interval(c, self.n_paths, Z95))
            .collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.survival.windows(2).all(|w| w[1] <= w[0])
    }

    /// Writes `T,survival,count,wilson_lo,wilson_hi` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "T,survival,count,wilson_lo,wilson_hi")?;
        for (((t, s), c), (lo, hi)) in self
            .t_grid
            .iter()
            .zip(&self.survival)
            .zip(&self.counts)
            .zip(self.wilson_intervals())
        {
            writeln!(out, "{t},{s},{c},{lo},{hi}")?;
        }
        Ok(())
    }
}

/// Wilson score interval for `successes` out of `n` at normal quantile `z`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Geometric grid of `points` times from `lo` to `hi`.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo * (ratio * i as f64).exp()
            }
        })
        .collect()
}

/// Fraction of profiles with `l(0, T] <= a` for each `T` in the grid.
pub fn survival_curve(profiles: &[LocalTimeProfile], t_grid: &[f64], a: f64) -> Result<PersistenceCurve> {
    if profiles.is_empty() {
        return Err(Error::InvalidInput("empty ensemble".into()));
    }
    let mut counts = vec![0u64; t_grid.len()];
    for p in profiles {
        for (c, &t) in counts.iter_mut().zip(t_grid) {
            if persistence_indicator(p, t, a)? {
                *c += 1;
            }
        }
    }
    PersistenceCurve::from_counts(t_grid.to_vec(), counts, profiles.len() as u64, a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub kappa_hat: f64,
    pub c_hat: f64,
    pub stderr_kappa: f64,
    pub fit_range: (f64, f64),
    pub r_squared: f64,
    pub points: usize,
}

/// Weighted least squares of `log survival` on `log T` over `[t_lo, t_hi]`.
///
/// Weights are the inverse delta-method variances `n s / (1 - s)` of
/// `log s`; a point with `s = 1` carries the weight of `s = 1 - 1/n`.
pub fn fit_exponent(curve: &PersistenceCurve, t_lo: f64, t_hi: f64) -> Result<ExponentFit> {
    let n = curve.n_paths as f64;
    let mut pts = Vec::new();
    for (&t, &s) in curve.t_grid.iter().zip(&curve.survival) {
        if t < t_lo * (1.0 - 1e-12) || t > t_hi * (1.0 + 1e-12) {
            continue;
        }
        if !(s > 0.0) {
            return Err(Error::FitRange(format!("zero survival at T = {t}")));
        }
        let q = (1.0 - s).max(1.0 / n);
        pts.push((t.ln(), s.ln(), n * s / q));
    }
    if pts.len() < 4 {
        return Err(Error::FitRange(format!(
            "{} grid points in [{t_lo}, {t_hi}], need 4",
            pts.len()
        )));
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| p.2 * (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(ExponentFit {
        kappa_hat: -slope,
        c_hat: intercept.exp(),
        stderr_kappa: (1.0 / sxx).sqrt(),
        fit_range: (t_lo, t_hi),
        r_squared,
        points: pts.len(),
    })
}

/// Default fit range `[horizon / 64, horizon / 4]`.
pub fn default_fit_range(horizon: f64) -> (f64, f64) {
    (horizon / 64.0, horizon / 4.0)
}

/// `P(|B_T| <= a) = erf(a / sqrt(2T))`, the law of Brownian local time at 0.
pub fn bm_exact_persistence(t: f64, a: f64) -> Result<f64> {
    if !(t > 0.0) || !(a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "T and a must be positive, got T = {t}, a = {a}"
        )));
    }
    Ok(erf(a / (2.0 * t).sqrt()))
}

/// `max_{grid t <= T} X_t <= 1`.
pub fn max_persistence_indicator(path: &SamplePath, t: f64) -> bool {
    let last = ((t / path.delta()) * (1.0 + 1e-12)).floor() as usize;
    path.values[..=last.min(path.values.len() - 1)]
        .iter()
        .all(|&x| x <= 1.0)
}
