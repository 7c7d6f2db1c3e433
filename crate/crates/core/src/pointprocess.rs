//! Marked point process of excursions: the bijection with jump functions,
//! the rescaling operators `S_r^beta`, counting statistics and tail-index
//! estimators for the excursion-length law.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localtime::{Jump, JumpFunction};

/// An atom of the point process: location in local-time units and mark
/// (excursion length) in time units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    pub x: f64,
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedPointSet {
    points: Vec<MarkedPoint>,
    window: (f64, f64),
}

impl MarkedPointSet {
    pub fn new(points: Vec<MarkedPoint>, window: (f64, f64)) -> Result<Self> {
        let (lo, hi) = window;
        if !(lo <= hi) {
            return Err(Error::InvalidInput(format!("empty window ({lo}, {hi})")));
        }
        for (i, p) in points.iter().enumerate() {
            if !(p.m > 0.0 && p.m.is_finite()) {
                return Err(Error::InvalidInput(format!("point {i} has mark {}", p.m)));
            }
            if !(p.x >= lo && p.x <= hi) {
                return Err(Error::InvalidInput(format!(
                    "point {i} at {} outside window ({lo}, {hi})",
                    p.x
                )));
            }
            if i > 0 && p.x < points[i - 1].x {
                return Err(Error::InvalidInput("points must be sorted by location".into()));
            }
        }
        Ok(Self { points, window })
    }

    pub fn points(&self) -> &[MarkedPoint] {
        &self.points
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `N([x_lo, x_hi] x (m_min, inf))`.
    pub fn count(&self, x_lo: f64, x_hi: f64, m_min: f64) -> usize {
        let start = self.points.partition_point(|p| p.x < x_lo);
        self.points[start..]
            .iter()
            .take_while(|p| p.x <= x_hi)
            .filter(|p| p.m > m_min)
            .count()
    }

    pub fn marks(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.m)
    }
}

/// Writes `path_id,x,m` rows with a header for a collection of point sets.
pub fn write_point_sets_csv<'a, W: Write>(
    mut out: W,
    sets: impl IntoIterator<Item = (u64, &'a MarkedPointSet)>,
) -> std::io::Result<()> {
    writeln!(out, "path_id,x,m")?;
    for (id, set) in sets {
        for p in set.points() {
            writeln!(out, "{},{},{}", id, p.x, p.m)?;
        }
    }
    Ok(())
}

/// The jumps of `inverse` located in `window`, as marked points.
pub fn jumps_to_empp(inverse: &JumpFunction, window: (f64, f64)) -> Result<MarkedPointSet> {
    let (lo, hi) = window;
    if !(lo >= 0.0 && lo <= hi && hi <= inverse.total_mass_cap()) {
        return Err(Error::OutOfRange(format!(
            "window ({lo}, {hi}) not within [0, {}]",
            inverse.total_mass_cap()
        )));
    }
    let points = inverse
        .jumps()
        .iter()
        .filter(|j| j.location >= lo && j.location <= hi)
        .map(|j| MarkedPoint {
            x: j.location,
            m: j.size,
        })
        .collect();
    Ok(MarkedPointSet { points, window })
}

/// Pure-jump function whose jumps are the points; mass cap is the right end
/// of the window.
pub fn empp_to_jumps(points: &MarkedPointSet) -> Result<JumpFunction> {
    if points.points.windows(2).any(|w| w[0].x == w[1].x) {
        return Err(Error::InvalidInput("duplicate point locations".into()));
    }
    let jumps = points
        .points
        .iter()
        .map(|p| Jump {
            location: p.x,
            size: p.m,
        })
        .collect();
    JumpFunction::new(jumps, 0.0, points.window.1)
}

/// `S_r^beta`: each point `(x, m)` moves to `(x / r, m / r^beta)`.
pub fn rescale_empp(points: &MarkedPointSet, r: f64, beta: f64) -> Result<MarkedPointSet> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale r must be positive, got {r}")));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let mark_scale = r.powf(beta);
    Ok(MarkedPointSet {
        points: points
            .points
            .iter()
            .map(|p| MarkedPoint {
                x: p.x / r,
                m: p.m / mark_scale,
            })
            .collect(),
        window: (points.window.0 / r, points.window.1 / r),
    })
}

/// `sum_{k=1}^{n} 1{ L_{k/n} - L_{(k-1)/n} > r }`.
pub fn count_heavy_subintervals(inverse: &JumpFunction, n: usize, r: f64) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("r must be positive, got {r}")));
    }
    if inverse.value(1.0).is_none() {
        return Err(Error::OutOfRange(format!(
            "inverse local time is not determined on [0, 1] (mass {})",
            inverse.total_mass_cap()
        )));
    }
    // the first subinterval is [0, 1/n], so a jump at 0 belongs to it: L_{0-} = 0
    let mut prev = 0.0;
    let mut count = 0;
    for k in 1..=n {
        let x = k as f64 / n as f64;
        let cur = inverse.value(x).expect("checked range");
        if cur - prev > r {
            count += 1;
        }
        prev = cur;
    }
    Ok(count)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FitMethod {
    Hill,
    LoglogCounts,
}

/// Fitted power-law intensity `c m^{-1-alpha} dx dm` of the marks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityFit {
    pub method: FitMethod,
    /// Tail index `alpha`, estimating `1 - H`.
    pub exponent: f64,
    pub stderr: f64,
    pub k_used: usize,
    /// Intensity constant per unit of local-time exposure.
    pub constant: f64,
}

impl IntensityFit {
    /// Rescales the constant to a total local-time exposure.
    pub fn per_exposure(mut self, exposure: f64) -> Self {
        self.constant /= exposure;
        self
    }
}

fn sorted_descending(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Hill estimator on the `k` largest marks:
/// `alpha = [ (1/k) sum_{i<=k} log(m_(i) / m_(k+1)) ]^{-1}`, `stderr = alpha / sqrt(k)`.
pub fn hill_tail_index(marks: &[f64], k: usize) -> Result<IntensityFit> {
    censored_hill_tail_index(marks, &[], k)
}

/// Hill estimator for right-censored samples: censored values enter the
/// order statistics with their observed length but only uncensored values
/// count in the numerator. Reduces to [`hill_tail_index`] without censoring.
pub fn censored_hill_tail_index(marks: &[f64], censored: &[f64], k: usize) -> Result<IntensityFit> {
    if marks.iter().chain(censored).any(|&m| !(m > 0.0)) {
        return Err(Error::InvalidInput("marks must be positive".into()));
    }
    let total = marks.len() + censored.len();
    if k < 2 || k >= total {
        return Err(Error::InvalidInput(format!(
            "k = {k} must satisfy 2 <= k < {total}"
        )));
    }
    let mut all: Vec<(f64, bool)> = marks
        .iter()
        .map(|&m| (m, false))
        .chain(censored.iter().map(|&m| (m, true)))
        .collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0));
    let threshold = all[k].0;
    let log_sum: f64 = all[..k].iter().map(|(m, _)| (m / threshold).ln()).sum();
    let uncensored = all[..k].iter().filter(|(_, c)| !c).count();
    if !(log_sum > 0.0) || uncensored == 0 {
        return Err(Error::InvalidInput("degenerate upper order statistics".into()));
    }
    let exponent = uncensored as f64 / log_sum;
    Ok(IntensityFit {
        method: FitMethod::Hill,
        exponent,
        stderr: exponent / (uncensored as f64).sqrt(),
        k_used: k,
        constant: exponent * uncensored as f64 * threshold.powf(exponent),
    })
}

/// Default Hill `k`: number of marks above `floor`.
pub fn default_hill_k(marks: &[f64], floor: f64) -> usize {
    marks.iter().filter(|&&m| m > floor).count()
}

/// Least-squares fit of `log N(> r)` against `log r` over `thresholds`,
/// with counts normalized by `exposure`.
pub fn loglog_tail_fit(marks: &[f64], thresholds: &[f64], exposure: f64) -> Result<IntensityFit> {
    if thresholds.len() < 3 {
        return Err(Error::InvalidInput("need at least three thresholds".into()));
    }
    if !(exposure > 0.0) {
        return Err(Error::InvalidParameter("exposure must be positive".into()));
    }
    let sorted = sorted_descending(marks);
    let mut pts = Vec::with_capacity(thresholds.len());
    for &r in thresholds {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter("thresholds must be positive".into()));
        }
        let count = sorted.partition_point(|&m| m > r);
        if count == 0 {
            return Err(Error::InsufficientData(format!("no marks above {r}")));
        }
        pts.push((r.ln(), (count as f64 / exposure).ln(), count));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let resid: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let stderr = if pts.len() > 2 {
        (resid / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let exponent = -slope;
    Ok(IntensityFit {
        method: FitMethod::LoglogCounts,
        exponent,
        stderr,
        k_used: pts[0].2,
        // N(> r) per unit exposure = (c / alpha) r^{-alpha}
        constant: exponent * intercept.exp(),
    })
}

/// Marks of `inverse` above `threshold` with location in `(0, x_hi]`, plus
/// the incomplete final excursion when it lies in the window and is known
/// to exceed `threshold`. A jump at 0 is the grid's delay before the first
/// occupied cell and carries no intensity.
pub fn window_count(inverse: &JumpFunction, x_hi: f64, threshold: f64) -> usize {
    let cap = inverse.total_mass_cap();
    let complete = inverse
        .jumps()
        .iter()
        .take_while(|j| j.location <= x_hi)
        .filter(|j| j.location > 0.0 && j.size > threshold)
        .count();
    let open = match inverse.open_tail() {
        Some(tail) if cap <= x_hi && tail > threshold => 1,
        _ => 0,
    };
    complete + open
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityRatio {
    pub r: f64,
    /// Ensemble-average count above `r` over the ensemble-average count above `4r`.
    pub ratio: f64,
    pub stderr: f64,
    pub count_r: u64,
    pub count_4r: u64,
    pub n_paths: usize,
}

/// Minimum number of points above `4r` for [`intensity_ratio_test`].
pub const MIN_RATIO_POINTS: u64 = 100;

/// Ratio of mean counts `N([0, x_hi] x (r, inf)) / N([0, x_hi] x (4r, inf))`
/// over an ensemble of inverse local times; `4^{1-H}` under a power-law
/// intensity.
pub fn intensity_ratio_test(ensemble: &[JumpFunction], r: f64, x_hi: f64) -> Result<IntensityRatio> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("r must be positive, got {r}")));
    }
    let pairs: Vec<(f64, f64)> = ensemble
        .iter()
        .map(|f| {
            (
                window_count(f, x_hi, r) as f64,
                window_count(f, x_hi, 4.0 * r) as f64,
            )
        })
        .collect();
    ratio_from_counts(r, &pairs)
}

/// [`intensity_ratio_test`] from precomputed per-path count pairs.
pub fn ratio_from_counts(r: f64, pairs: &[(f64, f64)]) -> Result<IntensityRatio> {
    let n = pairs.len();
    let sum_a: f64 = pairs.iter().map(|p| p.0).sum();
    let sum_b: f64 = pairs.iter().map(|p| p.1).sum();
    if (sum_b as u64) < MIN_RATIO_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} points above 4r = {}, need {MIN_RATIO_POINTS}",
            sum_b,
            4.0 * r
        )));
    }
    let ratio = sum_a / sum_b;
    let mean_b = sum_b / n as f64;
    let var: f64 = pairs
        .iter()
        .map(|(a, b)| (a - ratio * b).powi(2))
        .sum::<f64>()
        / (n as f64 - 1.0).max(1.0);
    Ok(IntensityRatio {
        r,
        ratio,
        stderr: (var / n as f64).sqrt() / mean_b,
        count_r: sum_a as u64,
        count_4r: sum_b as u64,
        n_paths: n,
    })
}

/// `sum (m ∧ 1)` per unit local time; finite under the integrability
/// condition of the intensity.
pub fn integrability_diagnostic(inverse: &JumpFunction) -> Option<f64> {
    let cap = inverse.total_mass_cap();
    (cap > 0.0).then(|| inverse.jumps().iter().map(|j| j.size.min(1.0)).sum::<f64>() / cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jf(jumps: &[(f64, f64)], cap: f64) -> JumpFunction {
        JumpFunction::new(
            jumps
                .iter()
                .map(|&(location, size)| Jump { location, size })
                .collect(),
            0.0,
            cap,
        )
        .unwrap()
    }

    #[test]
    fn empp_examples() {
        let f = jf(&[(0.0, 1.0)], 1.0);
        let p = jumps_to_empp(&f, (0.0, 1.0)).unwrap();
        assert_eq!(p.points(), &[MarkedPoint { x: 0.0, m: 1.0 }]);
        assert_eq!(empp_to_jumps(&p).unwrap(), f);

        let empty = JumpFunction::empty();
        let p = jumps_to_empp(&empty, (0.0, 0.0)).unwrap();
        assert!(p.is_empty());
        assert_eq!(empp_to_jumps(&p).unwrap(), empty);

        assert!(matches!(
            jumps_to_empp(&f, (0.0, 2.0)),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn duplicate_locations_rejected() {
        let pts = MarkedPointSet::new(
            vec![MarkedPoint { x: 0.5, m: 1.0 }, MarkedPoint { x: 0.5, m: 2.0 }],
            (0.0, 1.0),
        )
        .unwrap();
        assert!(matches!(empp_to_jumps(&pts), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn rescale_examples() {
        let pts = MarkedPointSet::new(vec![MarkedPoint { x: 2.0, m: 8.0 }], (0.0, 4.0)).unwrap();
        let s = rescale_empp(&pts, 0.5, 2.0).unwrap();
        assert_eq!(s.points(), &[MarkedPoint { x: 4.0, m: 32.0 }]);
        assert_eq!(s.window(), (0.0, 8.0));
        assert_eq!(rescale_empp(&pts, 1.0, 2.0).unwrap(), pts);
        assert!(rescale_empp(&pts, 0.0, 2.0).is_err());
        assert!(rescale_empp(&pts, -1.0, 2.0).is_err());
    }

    #[test]
    fn heavy_subinterval_examples() {
        let f = jf(&[(0.25, 3.0), (0.6, 0.5)], 1.0);
        assert_eq!(count_heavy_subintervals(&f, 4, 1.0).unwrap(), 1);
        assert_eq!(count_heavy_subintervals(&f, 4, 0.4).unwrap(), 2);
        let short = jf(&[(0.25, 3.0)], 0.5);
        assert!(matches!(
            count_heavy_subintervals(&short, 4, 1.0),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn hill_examples() {
        let e = std::f64::consts::E;
        let fit = hill_tail_index(&[e * e, e, 1.0], 2).unwrap();
        assert!((fit.exponent - 1.0 / 1.5).abs() < 1e-12);
        assert!((fit.stderr - fit.exponent / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(fit.k_used, 2);
        assert!(hill_tail_index(&[e, 1.0, 0.0], 1).is_err());
        assert!(hill_tail_index(&[3.0, 2.0, 1.0], 3).is_err());
        assert!(hill_tail_index(&[3.0, 2.0, -1.0], 2).is_err());
    }

    #[test]
    fn censored_hill_reduces_to_hill() {
        let marks = [5.0, 4.0, 3.5, 2.0, 1.0, 0.5];
        let a = hill_tail_index(&marks, 4).unwrap();
        let b = censored_hill_tail_index(&marks, &[], 4).unwrap();
        assert_eq!(a, b);
        let c = censored_hill_tail_index(&marks, &[10.0], 4).unwrap();
        assert!(c.exponent < a.exponent);
    }

    #[test]
    fn ratio_needs_enough_points() {
        let ens = vec![jf(&[(0.5, 10.0)], 1.0)];
        assert!(matches!(
            intensity_ratio_test(&ens, 1.0, 1.0),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn integrability() {
        let f = jf(&[(0.1, 0.5), (0.2, 3.0)], 2.0);
        assert_eq!(integrability_diagnostic(&f), Some(0.75));
        assert_eq!(integrability_diagnostic(&JumpFunction::empty()), None);
    }
}
