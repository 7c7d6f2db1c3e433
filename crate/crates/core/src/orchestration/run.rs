//! Parallel per-path evaluation and the deterministic ordered merge.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::generators::{derive_path_seed, PathGenerator, SamplePath};
use crate::invariance::{
    bi_scale_from_pairs, bi_scale_pair, increment_pair, self_similarity_from_pairs,
    stationarity_from_pairs, Battery, BiScaleParams, TestReport,
};
use crate::localtime::{
    atom_diagnostic, estimate_local_time, invert_profile, persistence_indicator,
    persistence_indicator_inverse, support_diagnostic, JumpFunction, LocalTimeProfile,
};
use crate::persistence::{
    bm_exact_persistence, fit_exponent, max_persistence_indicator, ExponentFit, PersistenceCurve,
};
use crate::pointprocess::{
    censored_hill_tail_index, count_heavy_subintervals, hill_tail_index, integrability_diagnostic,
    jumps_to_empp, loglog_tail_fit, ratio_from_counts, window_count, IntensityFit, IntensityRatio,
    MarkedPointSet,
};

/// Largest tolerated fraction of failed paths before a run aborts.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

/// Everything the aggregates need from one path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub index: u64,
    pub persist: Vec<bool>,
    pub max_persist: Vec<bool>,
    /// Grid times where the profile and inverse encodings of the event disagree.
    pub inverse_mismatches: usize,
    /// Complete excursion lengths above the Hill floor.
    pub marks: Vec<f64>,
    /// Largest complete excursion length at or below the floor.
    pub max_mark_below_floor: Option<f64>,
    /// Incomplete final excursion, when above the floor.
    pub censored: Option<f64>,
    pub total_mass: f64,
    pub ratio_counts: (f64, f64),
    pub heavy_counts: Vec<Option<usize>>,
    pub stationarity: Option<(f64, f64)>,
    /// `(l(0, rT], l(0, T])`.
    pub self_similarity: (f64, f64),
    pub bi_scale: Option<(f64, f64)>,
    pub bi_scale_wrong_beta: Option<(f64, f64)>,
    pub atom: f64,
    pub support: f64,
    pub integrability: Option<f64>,
    /// Point set on `[0, window]` kept for the first few paths.
    pub points: Option<MarkedPointSet>,
}

/// The per-path pipeline: profile, inverse, point set and event indicators.
pub fn evaluate_path(cfg: &ExperimentConfig, index: u64, path: &SamplePath, t_grid: &[f64]) -> Result<PathRecord> {
    let delta = path.delta();
    let a = cfg.threshold;
    let profile = estimate_local_time(path, cfg.epsilon_rule.for_path(path))?;
    let inverse = invert_profile(&profile);
    let horizon = profile.horizon();

    let mut persist = Vec::with_capacity(t_grid.len());
    let mut max_persist = Vec::with_capacity(t_grid.len());
    let mut inverse_mismatches = 0;
    for &t in t_grid {
        let direct = persistence_indicator(&profile, t, a)?;
        if direct != persistence_indicator_inverse(&inverse, horizon, t, a)? {
            inverse_mismatches += 1;
        }
        persist.push(direct);
        max_persist.push(max_persistence_indicator(path, t));
    }

    let ex = &cfg.excursions;
    let floor = ex.hill_floor_cells * delta;
    let marks = inverse.jumps().iter().map(|j| j.size).filter(|&m| m > floor).collect();
    let max_mark_below_floor = inverse
        .jumps()
        .iter()
        .map(|j| j.size)
        .filter(|&m| m <= floor)
        .reduce(f64::max);
    let censored = inverse.open_tail().filter(|&m| m > floor);

    let r = ex.ratio_r_cells * delta;
    let ratio_counts = (
        window_count(&inverse, ex.window, r) as f64,
        window_count(&inverse, ex.window, 4.0 * r) as f64,
    );
    let heavy_counts = ex
        .counting_n
        .iter()
        .map(|&n| count_heavy_subintervals(&inverse, n, ex.counting_r_cells * delta).ok())
        .collect();

    let tc = &cfg.tests;
    let stationarity = increment_pair(&inverse, tc.stationarity_x0, tc.stationarity_h);
    let self_similarity = (profile.at(tc.self_similarity_r * horizon), profile.total());
    let bi = BiScaleParams {
        r: tc.bi_scale_r,
        beta: cfg.beta(),
        window: tc.bi_scale_window,
        min_mark: tc.bi_scale_min_mark_cells * delta,
        max_mark: tc.bi_scale_mark_band.map(|b| b * tc.bi_scale_min_mark_cells * delta),
    };
    let (bi_scale, bi_scale_wrong_beta) = bi_scale_pairs(&inverse, &bi)?;

    let points = if index < ex.dump_paths as u64 {
        let w = ex.window.min(inverse.total_mass_cap());
        Some(jumps_to_empp(&inverse, (0.0, w))?)
    } else {
        None
    };

    Ok(PathRecord {
        index,
        persist,
        max_persist,
        inverse_mismatches,
        marks,
        max_mark_below_floor,
        censored,
        total_mass: profile.total(),
        ratio_counts,
        heavy_counts,
        stationarity,
        self_similarity,
        bi_scale,
        bi_scale_wrong_beta,
        atom: atom_diagnostic(&profile),
        support: support_diagnostic(&profile),
        integrability: integrability_diagnostic(&inverse),
        points,
    })
}

fn bi_scale_pairs(inverse: &JumpFunction, p: &BiScaleParams) -> Result<(Option<(f64, f64)>, Option<(f64, f64)>)> {
    let needed = p.window * p.r.max(1.0);
    if inverse.total_mass_cap() <= needed {
        return Ok((None, None));
    }
    let pts = jumps_to_empp(inverse, (0.0, needed))?;
    let wrong = BiScaleParams {
        beta: p.beta / 2.0,
        ..*p
    };
    Ok((bi_scale_pair(&pts, p)?, bi_scale_pair(&pts, &wrong)?))
}

/// Per-path records in path-index order plus the failures.
#[derive(Debug)]
pub struct Ensemble {
    pub records: Vec<PathRecord>,
    pub failures: Vec<(u64, String)>,
    pub t_grid: Vec<f64>,
}

/// Runs every path on a pool of `workers` threads (the config hint, or
/// rayon's default). Records are merged in path-index order, so the result
/// does not depend on scheduling.
pub fn run_ensemble(cfg: &ExperimentConfig) -> Result<Ensemble> {
    cfg.validate()?;
    let generator = PathGenerator::new(&cfg.process)?;
    let t_grid = cfg.t_grid();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let results: Vec<Result<PathRecord>> = pool.install(|| {
        (0..cfg.n_paths)
            .into_par_iter()
            .map(|i| {
                let path = generator.sample(derive_path_seed(cfg.master_seed, i));
                evaluate_path(cfg, i, &path, &t_grid).map_err(|e| Error::Path {
                        index: i,
                        source: Box::new(e),
                    })
            })
            .collect()
    });
    let mut records = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(Error::Path { index, source }) => failures.push((index, source.to_string())),
            Err(e) => return Err(e),
        }
    }
    if failures.len() as f64 > MAX_FAILURE_FRACTION * cfg.n_paths as f64 {
        return Err(Error::TooManyFailures {
            failed: failures.len(),
            total: cfg.n_paths as usize,
        });
    }
    if records.is_empty() {
        return Err(Error::InsufficientData("every path failed".into()));
    }
    Ok(Ensemble {
        records,
        failures,
        t_grid,
    })
}

/// A statistic that may be unavailable for this ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome<T> {
    Ok(T),
    Unavailable(String),
}

impl<T> Outcome<T> {
    pub fn ok(&self) -> Option<&T> {
        match self {
            Outcome::Ok(v) => Some(v),
            Outcome::Unavailable(_) => None,
        }
    }
}

impl<T> From<Result<T>> for Outcome<T> {
    fn from(r: Result<T>) -> Self {
        match r {
            Ok(v) => Outcome::Ok(v),
            Err(e) => Outcome::Unavailable(e.to_string()),
        }
    }
}

/// One row of the Brownian oracle comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub t: f64,
    pub survival: f64,
    pub exact: f64,
    pub stderr: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingSummary {
    pub n: Vec<usize>,
    /// Mean heavy-subinterval count at each `n`, over paths where all are defined.
    pub mean_counts: Vec<f64>,
    pub paths_used: usize,
    /// `|mean_last - mean_first| / mean_first`.
    pub relative_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSummary {
    pub floor: f64,
    pub hill: Outcome<IntensityFit>,
    pub censored_hill: Outcome<IntensityFit>,
    pub loglog: Outcome<IntensityFit>,
    /// `(threshold, count above, count per unit local time)` rows of the log-log fit.
    pub loglog_rows: Vec<(f64, usize, f64)>,
    pub ratio: Outcome<IntensityRatio>,
    pub ratio_target: f64,
    pub counting: CountingSummary,
    pub exposure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub n_paths: u64,
    pub failed_paths: Vec<(u64, String)>,
    pub inverse_mismatches: usize,
    pub survival_monotone: bool,
    pub mean_atom: f64,
    pub max_atom: f64,
    pub mean_support: f64,
    pub mean_integrability: Option<f64>,
    pub zero_mass_paths: usize,
}

/// Aggregates of one ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub curve: PersistenceCurve,
    pub fit: Outcome<ExponentFit>,
    pub max_curve: PersistenceCurve,
    pub max_fit: Outcome<ExponentFit>,
    pub kappa_target: f64,
    pub oracle: Vec<OracleRow>,
    pub tail: TailSummary,
    pub battery: Outcome<Battery>,
    pub diagnostics: Diagnostics,
}

fn curve_from(records: &[PathRecord], t_grid: &[f64], a: f64, pick: impl Fn(&PathRecord) -> &[bool]) -> Result<PersistenceCurve> {
    let mut counts = vec![0u64; t_grid.len()];
    for rec in records {
        for (c, &hit) in counts.iter_mut().zip(pick(rec)) {
            *c += hit as u64;
        }
    }
    PersistenceCurve::from_counts(t_grid.to_vec(), counts, records.len() as u64, a)
}

impl Ensemble {
    pub fn summarize(&self, cfg: &ExperimentConfig) -> Result<Summary> {
        let recs = &self.records;
        let (lo, hi) = cfg.fit_range();
        let curve = curve_from(recs, &self.t_grid, cfg.threshold, |r| &r.persist)?;
        let max_curve = curve_from(recs, &self.t_grid, 1.0, |r| &r.max_persist)?;
        let fit = fit_exponent(&curve, lo, hi).into();
        let max_fit = fit_exponent(&max_curve, lo, hi).into();
        let oracle = if cfg.process.hurst == 0.5 {
            oracle_rows(&curve)?
        } else {
            Vec::new()
        };
        Ok(Summary {
            fit,
            max_fit,
            kappa_target: 1.0 - cfg.process.hurst,
            oracle,
            tail: self.tail_summary(cfg),
            battery: self.battery(cfg).into(),
            diagnostics: self.diagnostics(&curve),
            max_curve,
            curve,
        })
    }

    fn tail_summary(&self, cfg: &ExperimentConfig) -> TailSummary {
        let recs = &self.records;
        let delta = cfg.process.delta();
        let ex = &cfg.excursions;
        let floor = ex.hill_floor_cells * delta;
        let mut marks: Vec<f64> = recs.iter().flat_map(|r| r.marks.iter().copied()).collect();
        let censored: Vec<f64> = recs.iter().filter_map(|r| r.censored).collect();
        let k_plain = marks.len();
        let k_cens = marks.len() + censored.len();
        // the order statistic just below the floor closes the Hill sum
        if let Some(below) = recs.iter().filter_map(|r| r.max_mark_below_floor).reduce(f64::max) {
            marks.push(below);
        }
        let exposure: f64 = recs.iter().map(|r| r.total_mass).sum();
        let hill = hill_tail_index(&marks, k_plain).map(|f| f.per_exposure(exposure));
        let censored_hill =
            censored_hill_tail_index(&marks, &censored, k_cens).map(|f| f.per_exposure(exposure));

        let thresholds: Vec<f64> = (0..8).map(|j| floor * 2f64.powi(j)).collect();
        let mut sorted = marks.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let loglog_rows = thresholds
            .iter()
            .map(|&t| {
                let c = sorted.partition_point(|&m| m > t);
                (t, c, c as f64 / exposure)
            })
            .collect();
        let usable: Vec<f64> = thresholds
            .iter()
            .copied()
            .filter(|&t| sorted.partition_point(|&m| m > t) >= 10)
            .collect();
        let loglog = loglog_tail_fit(&marks, &usable, exposure);

        let pairs: Vec<(f64, f64)> = recs.iter().map(|r| r.ratio_counts).collect();
        let ratio = ratio_from_counts(ex.ratio_r_cells * delta, &pairs);

        let complete: Vec<&Vec<Option<usize>>> = recs
            .iter()
            .map(|r| &r.heavy_counts)
            .filter(|c| c.iter().all(Option::is_some))
            .collect();
        let mean_counts: Vec<f64> = (0..ex.counting_n.len())
            .map(|j| {
                complete.iter().map(|c| c[j].unwrap() as f64).sum::<f64>()
                    / complete.len().max(1) as f64
            })
            .collect();
        let relative_change = match (mean_counts.first(), mean_counts.last()) {
            (Some(&a), Some(&b)) if mean_counts.len() > 1 && a > 0.0 => Some((b - a).abs() / a),
            _ => None,
        };

        TailSummary {
            floor,
            hill: hill.into(),
            censored_hill: censored_hill.into(),
            loglog: loglog.into(),
            loglog_rows,
            ratio: ratio.into(),
            ratio_target: 4f64.powf(1.0 - cfg.process.hurst),
            counting: CountingSummary {
                n: ex.counting_n.clone(),
                mean_counts,
                paths_used: complete.len(),
                relative_change,
            },
            exposure,
        }
    }

    /// The invariance battery with the configured null tests and power checks.
    pub fn battery(&self, cfg: &ExperimentConfig) -> Result<Battery> {
        let recs = &self.records;
        let tc = &cfg.tests;
        let h = cfg.process.hurst;
        let ss = |hurst: f64| -> Result<TestReport> {
            let scale = tc.self_similarity_r.powf(1.0 - hurst);
            let pairs: Vec<_> = recs
                .iter()
                .map(|r| Some((r.self_similarity.0, scale * r.self_similarity.1)))
                .collect();
            self_similarity_from_pairs(&pairs)
        };
        let mut nulls = Vec::new();
        let mut power = Vec::new();
        if tc.self_similarity {
            nulls.push(ss(h)?);
            if tc.power_checks {
                let mut r = ss(h + tc.wrong_hurst_offset)?;
                r.name = "profile_self_similarity_wrong_hurst".into();
                power.push(r);
            }
        }
        if tc.bi_scale {
            let pairs: Vec<_> = recs.iter().map(|r| r.bi_scale).collect();
            nulls.push(bi_scale_from_pairs(&pairs)?);
            if tc.power_checks {
                let pairs: Vec<_> = recs.iter().map(|r| r.bi_scale_wrong_beta).collect();
                let mut r = bi_scale_from_pairs(&pairs)?;
                r.name = "bi_scale_invariance_wrong_beta".into();
                power.push(r);
            }
        }
        if tc.stationarity {
            let pairs: Vec<_> = recs.iter().map(|r| r.stationarity).collect();
            nulls.push(stationarity_from_pairs(&pairs)?);
        }
        if nulls.is_empty() && power.is_empty() {
            return Err(Error::InsufficientData("no invariance tests selected".into()));
        }
        Ok(Battery::new(nulls, power))
    }

    fn diagnostics(&self, curve: &PersistenceCurve) -> Diagnostics {
        let recs = &self.records;
        let n = recs.len() as f64;
        let integ: Vec<f64> = recs.iter().filter_map(|r| r.integrability).collect();
        Diagnostics {
            n_paths: recs.len() as u64 + self.failures.len() as u64,
            failed_paths: self.failures.clone(),
            inverse_mismatches: recs.iter().map(|r| r.inverse_mismatches).sum(),
            survival_monotone: curve.is_monotone(),
            mean_atom: recs.iter().map(|r| r.atom).sum::<f64>() / n,
            max_atom: recs.iter().map(|r| r.atom).fold(0.0, f64::max),
            mean_support: recs.iter().map(|r| r.support).sum::<f64>() / n,
            mean_integrability: (!integ.is_empty()).then(|| integ.iter().sum::<f64>() / integ.len() as f64),
            zero_mass_paths: recs.iter().filter(|r| r.total_mass == 0.0).count(),
        }
    }
}

/// Survival against `erf(a / sqrt(2T))` at every grid time, with tolerance
/// `10% + 3` binomial standard errors.
pub fn oracle_rows(curve: &PersistenceCurve) -> Result<Vec<OracleRow>> {
    curve
        .t_grid
        .iter()
        .zip(&curve.survival)
        .zip(curve.standard_errors())
        .map(|((&t, &s), se)| {
            let exact = bm_exact_persistence(t, curve.threshold)?;
            let tolerance = 0.10 * exact + 3.0 * se;
            Ok(OracleRow {
                t,
                survival: s,
                exact,
                stderr: se,
                tolerance,
                pass: (s - exact).abs() <= tolerance,
            })
        })
        .collect()
}

/// Profile and inverse of a single path, for callers that want to inspect
/// one trajectory.
pub fn path_pipeline(cfg: &ExperimentConfig, path: &SamplePath) -> Result<(LocalTimeProfile, JumpFunction)> {
    let profile = estimate_local_time(path, cfg.epsilon_rule.for_path(path))?;
    let inverse = invert_profile(&profile);
    Ok((profile, inverse))
}
