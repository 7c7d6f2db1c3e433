//! Two-sample Kolmogorov–Smirnov tests for the distributional invariances:
//! self-similarity of the local-time profile, bi-scale invariance of the
//! excursion point process and stationary increments of the inverse local
//! time.
//!
//! Every test compares two *independent* samples: the ensemble is split
//! into even- and odd-indexed paths, one half per side.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localtime::{JumpFunction, LocalTimeProfile};
use crate::pointprocess::{rescale_empp, MarkedPointSet};

/// Nominal level of every individual test.
pub const LEVEL: f64 = 0.01;

/// Largest tolerated fraction of paths excluded for lack of local-time mass.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
    pub reject_at_01: bool,
    #[serde(default)]
    pub excluded: usize,
}

/// Asymptotic two-sided Kolmogorov distribution tail `P(K > lambda)`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-transformed series converges fast for small lambda
        let y = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let s: f64 = (0..6)
            .map(|j| {
                let k = (2 * j + 1) as f64;
                (k * k * y).exp()
            })
            .sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        for j in 1..=100 {
            let jf = j as f64;
            let term = (-2.0 * jf * jf * lambda * lambda).exp();
            s += if j % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

fn sorted(values: &[f64]) -> Result<Vec<f64>> {
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidInput("NaN in sample".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `sup |F_a - F_b|` with the asymptotic p-value (Stephens' small-sample
/// correction of the effective size).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestReport> {
    ks_named("ks_two_sample", a, b)
}

fn ks_named(name: &str, a: &[f64], b: &[f64]) -> Result<TestReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("KS test needs two non-empty samples".into()));
    }
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (n1, n2) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n1 && j < n2 {
        let x = a[i].min(b[j]);
        while i < n1 && a[i] <= x {
            i += 1;
        }
        while j < n2 && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let en = (n1 as f64 * n2 as f64 / (n1 + n2) as f64).sqrt();
    let p_value = kolmogorov_tail((en + 0.12 + 0.11 / en) * d);
    Ok(TestReport {
        name: name.to_string(),
        statistic: d,
        p_value,
        n1,
        n2,
        reject_at_01: p_value < LEVEL,
        excluded: 0,
    })
}

/// Splits per-path sample pairs into independent halves: side one from
/// even-indexed paths, side two from odd-indexed ones. `None` entries are
/// excluded paths.
fn split_halves(pairs: &[Option<(f64, f64)>]) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let total = pairs.len();
    let excluded = pairs.iter().filter(|p| p.is_none()).count();
    if total == 0 {
        return Err(Error::InvalidInput("empty ensemble".into()));
    }
    if excluded as f64 > MAX_EXCLUDED_FRACTION * total as f64 {
        return Err(Error::InsufficientMass { excluded, total });
    }
    let mut first = Vec::new();
    let mut second = Vec::new();
    for (idx, (one, two)) in pairs.iter().flatten().enumerate() {
        if idx % 2 == 0 {
            first.push(*one);
        } else {
            second.push(*two);
        }
    }
    Ok((first, second, excluded))
}

fn split_test(name: &str, pairs: &[Option<(f64, f64)>]) -> Result<TestReport> {
    let (a, b, excluded) = split_halves(pairs)?;
    let mut report = ks_named(name, &a, &b)?;
    report.excluded = excluded;
    Ok(report)
}

/// Per-path `(L_{x0+h} - L_{x0}, L_h - L_0)`, or `None` when `L_{x0+h}` is
/// beyond the path's local-time mass.
///
/// On a grid `L_0` is the delay until the first occupied cell, which is
/// positive with positive probability although it vanishes in the
/// continuum; both sides are therefore measured from an occupied cell.
pub fn increment_pair(inverse: &JumpFunction, x0: f64, h: f64) -> Option<(f64, f64)> {
    let end = inverse.value(x0 + h)?;
    let start = inverse.value(x0)?;
    let base = inverse.value(h)? - inverse.value(0.0)?;
    Some((end - start, base))
}

/// KS test of `L_{x0+h} - L_{x0}` against `L_h` across the ensemble.
pub fn test_l_increment_stationarity(ensemble: &[JumpFunction], x0: f64, h: f64) -> Result<TestReport> {
    if !(x0 >= 0.0 && h > 0.0) {
        return Err(Error::InvalidParameter(format!("need x0 >= 0, h > 0; got {x0}, {h}")));
    }
    let pairs: Vec<_> = ensemble.iter().map(|f| increment_pair(f, x0, h)).collect();
    stationarity_from_pairs(&pairs)
}

pub fn stationarity_from_pairs(pairs: &[Option<(f64, f64)>]) -> Result<TestReport> {
    split_test("l_increment_stationarity", pairs)
}

/// Per-path `(l(0, r T], r^{1-H} l(0, T])` at the profile horizon `T`.
pub fn self_similarity_pair(profile: &LocalTimeProfile, r: f64, hurst: f64) -> (f64, f64) {
    let horizon = profile.horizon();
    (profile.at(r * horizon), r.powf(1.0 - hurst) * profile.total())
}

/// KS test of `l(0, r T]` against `r^{1-H} l(0, T]`.
pub fn test_profile_self_similarity(profiles: &[LocalTimeProfile], r: f64, hurst: f64) -> Result<TestReport> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidParameter(format!("r must lie in (0, 1], got {r}")));
    }
    if !(0.0..1.0).contains(&hurst) {
        return Err(Error::InvalidParameter(format!("hurst must lie in [0, 1), got {hurst}")));
    }
    let pairs: Vec<_> = profiles
        .iter()
        .map(|p| Some(self_similarity_pair(p, r, hurst)))
        .collect();
    self_similarity_from_pairs(&pairs)
}

pub fn self_similarity_from_pairs(pairs: &[Option<(f64, f64)>]) -> Result<TestReport> {
    split_test("profile_self_similarity", pairs)
}

/// Parameters of the bi-scale comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiScaleParams {
    pub r: f64,
    pub beta: f64,
    /// Right end of the local-time window `[0, x_w]`.
    pub window: f64,
    /// Mark threshold `m0`.
    pub min_mark: f64,
    /// Optional upper mark bound `m1`, rescaled to `r^beta m1` alongside
    /// `m0`. On a finite horizon the paths that must be excluded are the
    /// ones holding an excursion comparable to the horizon, which the
    /// rescaled side would always count; a band keeps such marks out of
    /// both sides.
    #[serde(default)]
    pub max_mark: Option<f64>,
}

/// Per-path `(N((0, x_w] x (m0, m1]), (S_r^beta N)((0, x_w] x (m0, m1]))`,
/// or `None` when the point set's window does not cover what either
/// side needs.
pub fn bi_scale_pair(points: &MarkedPointSet, params: &BiScaleParams) -> Result<Option<(f64, f64)>> {
    let BiScaleParams {
        r,
        beta,
        window,
        min_mark,
        max_mark,
    } = *params;
    let raw_needed = window;
    let scaled_needed = window * r;
    if points.window().1 < raw_needed.max(scaled_needed) {
        return Ok(None);
    }
    // the point at local time 0 is the grid's first-occupation delay, not
    // part of the intensity, so both counts run over (0, x_w]
    let band = (min_mark, max_mark.unwrap_or(f64::INFINITY));
    let raw = count_after_origin(points, window, band) as f64;
    let scaled = count_after_origin(&rescale_empp(points, r, beta)?, window, band) as f64;
    Ok(Some((raw, scaled)))
}

fn count_after_origin(points: &MarkedPointSet, x_hi: f64, (lo, hi): (f64, f64)) -> usize {
    points
        .points()
        .iter()
        .take_while(|p| p.x <= x_hi)
        .filter(|p| p.x > 0.0 && p.m > lo && p.m <= hi)
        .count()
}

/// KS test of the raw count statistic against the `S_r^beta`-rescaled one.
pub fn test_bi_scale_invariance(
    ensemble: &[MarkedPointSet],
    r: f64,
    hurst: f64,
    window: f64,
    min_mark: f64,
) -> Result<TestReport> {
    if !(0.0..1.0).contains(&hurst) {
        return Err(Error::InvalidParameter(format!("hurst must lie in [0, 1), got {hurst}")));
    }
    let params = BiScaleParams {
        r,
        beta: 1.0 / (1.0 - hurst),
        window,
        min_mark,
        max_mark: None,
    };
    test_bi_scale_invariance_with(ensemble, &params)
}

/// [`test_bi_scale_invariance`] with an explicit `beta`.
pub fn test_bi_scale_invariance_with(ensemble: &[MarkedPointSet], params: &BiScaleParams) -> Result<TestReport> {
    let pairs = ensemble
        .iter()
        .map(|p| bi_scale_pair(p, params))
        .collect::<Result<Vec<_>>>()?;
    bi_scale_from_pairs(&pairs)
}

pub fn bi_scale_from_pairs(pairs: &[Option<(f64, f64)>]) -> Result<TestReport> {
    split_test("bi_scale_invariance", pairs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryEntry {
    #[serde(flatten)]
    pub report: TestReport,
    /// Whether the test is expected to reject (a power check).
    pub expect_reject: bool,
    pub reject_corrected: bool,
}

/// Test battery with Bonferroni correction across the null tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Battery {
    pub level: f64,
    pub corrected_level: f64,
    pub entries: Vec<BatteryEntry>,
}

impl Battery {
    /// `nulls` are invariance tests expected not to reject; `power_checks`
    /// are deliberately mis-specified ones expected to reject.
    pub fn new(nulls: Vec<TestReport>, power_checks: Vec<TestReport>) -> Self {
        let m = (nulls.len() + power_checks.len()).max(1);
        let corrected_level = LEVEL / m as f64;
        let entries = nulls
            .into_iter()
            .map(|r| (r, false))
            .chain(power_checks.into_iter().map(|r| (r, true)))
            .map(|(report, expect_reject)| BatteryEntry {
                reject_corrected: report.p_value < corrected_level,
                report,
                expect_reject,
            })
            .collect();
        Self {
            level: LEVEL,
            corrected_level,
            entries,
        }
    }

    /// Every null test fails to reject and every power check rejects at the
    /// corrected level.
    pub fn passed(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.reject_corrected == e.expect_reject)
    }

    /// Plain-text table for terminals.
    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<36} {:>9} {:>11} {:>7} {:>7} {:>6} {:>10} {:>8}",
            "test", "stat", "p-value", "n1", "n2", "raw", "corrected", "expect"
        );
        for e in &self.entries {
            let r = &e.report;
            let _ = writeln!(
                out,
                "{:<36} {:>9.5} {:>11.4e} {:>7} {:>7} {:>6} {:>10} {:>8}",
                r.name,
                r.statistic,
                r.p_value,
                r.n1,
                r.n2,
                if r.reject_at_01 { "reject" } else { "keep" },
                if e.reject_corrected { "reject" } else { "keep" },
                if e.expect_reject { "reject" } else { "keep" },
            );
        }
        let _ = writeln!(
            out,
            "Bonferroni level {:.2e} over {} tests",
            self.corrected_level,
            self.entries.len()
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointprocess::MarkedPoint;

    #[test]
    fn identical_samples() {
        let a = [0.3, 1.2, -0.5, 2.0, 0.0];
        let r = ks_two_sample(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.reject_at_01);
    }

    #[test]
    fn disjoint_singletons() {
        let r = ks_two_sample(&[0.0], &[1.0]).unwrap();
        assert_eq!(r.statistic, 1.0);
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(matches!(
            ks_two_sample(&[], &[1.0]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn statistic_matches_brute_force() {
        let a = [0.1, 0.4, 0.4, 0.9, 1.3, 2.2];
        let b = [0.0, 0.4, 0.5, 0.5, 3.0];
        let ecdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
        let brute = a
            .iter()
            .chain(&b)
            .map(|&x| (ecdf(&a, x) - ecdf(&b, x)).abs())
            .fold(0.0, f64::max);
        assert_eq!(ks_two_sample(&a, &b).unwrap().statistic, brute);
    }

    #[test]
    fn kolmogorov_tail_values() {
        // P(K > 1.3581) = 0.05 and P(K > 1.6276) = 0.01
        assert!((kolmogorov_tail(1.358_099) - 0.05).abs() < 1e-5);
        assert!((kolmogorov_tail(1.627_624) - 0.01).abs() < 1e-5);
        assert!((kolmogorov_tail(0.5) - 0.963_945).abs() < 1e-5);
        // both branches agree at the switch point
        let lo = kolmogorov_tail(1.18 - 1e-12);
        let hi = kolmogorov_tail(1.18);
        assert!((lo - hi).abs() < 1e-10);
    }

    #[test]
    fn deterministic_stationarity() {
        let f = JumpFunction::new(Vec::new(), 1.0, 10.0).unwrap();
        let ens = vec![f; 20];
        let r = test_l_increment_stationarity(&ens, 0.5, 0.5).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn stationarity_mass_cap() {
        let short = JumpFunction::new(Vec::new(), 1.0, 0.5).unwrap();
        let long = JumpFunction::new(Vec::new(), 1.0, 10.0).unwrap();
        let mut ens = vec![long; 7];
        ens.extend(vec![short; 3]);
        assert!(matches!(
            test_l_increment_stationarity(&ens, 0.5, 0.5),
            Err(Error::InsufficientMass { excluded: 3, total: 10 })
        ));
    }

    #[test]
    fn deterministic_self_similarity() {
        let p = LocalTimeProfile::from_cumulative(1.0, 1.0, (0..=64).map(f64::from).collect()).unwrap();
        let ens = vec![p; 10];
        let r = test_profile_self_similarity(&ens, 0.25, 0.0).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn bi_scale_identity_at_unit_r() {
        let set = MarkedPointSet::new(
            vec![
                MarkedPoint { x: 0.1, m: 2.0 },
                MarkedPoint { x: 0.7, m: 0.3 },
            ],
            (0.0, 2.0),
        )
        .unwrap();
        let ens = vec![set; 10];
        let r = test_bi_scale_invariance(&ens, 1.0, 0.5, 1.0, 0.1).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn battery_bonferroni() {
        let mk = |p: f64| TestReport {
            name: "t".into(),
            statistic: 0.0,
            p_value: p,
            n1: 1,
            n2: 1,
            reject_at_01: p < LEVEL,
            excluded: 0,
        };
        let b = Battery::new(vec![mk(0.004), mk(0.5)], vec![mk(1e-9)]);
        assert!((b.corrected_level - 0.01 / 3.0).abs() < 1e-15);
        assert!(!b.entries[0].reject_corrected);
        assert!(b.entries[0].report.reject_at_01);
        assert!(b.passed());
        let b = Battery::new(vec![mk(0.5)], vec![mk(0.2)]);
        assert!(!b.passed());
        assert!(b.summary_table().contains("Bonferroni"));
    }

    #[test]
    fn mark_band_bounds_both_sides() {
        let set = MarkedPointSet::new(
            vec![
                MarkedPoint { x: 0.0, m: 50.0 },
                MarkedPoint { x: 0.25, m: 1.5 },
                MarkedPoint { x: 0.5, m: 8.0 },
                MarkedPoint { x: 0.75, m: 30.0 },
            ],
            (0.0, 4.0),
        )
        .unwrap();
        let mut params = BiScaleParams {
            r: 2.0,
            beta: 1.0,
            window: 1.0,
            min_mark: 1.0,
            max_mark: None,
        };
        // the origin point never counts; rescaling halves locations and marks
        assert_eq!(bi_scale_pair(&set, &params).unwrap(), Some((3.0, 2.0)));
        params.max_mark = Some(10.0);
        // the band drops 30 from the raw side and 15 from the rescaled side
        assert_eq!(bi_scale_pair(&set, &params).unwrap(), Some((2.0, 1.0)));
    }
}
