use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{Family, ProcessSpec};
use crate::localtime::EpsilonRule;
use crate::persistence::{default_fit_range, geometric_grid};

/// Version of the JSON configuration schema understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

/// Geometric grid of persistence times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGridSpec {
    /// Smallest time as a fraction of the horizon.
    pub lo_fraction: f64,
    /// Largest time as a fraction of the horizon.
    pub hi_fraction: f64,
    pub points: usize,
}

impl Default for TGridSpec {
    fn default() -> Self {
        Self {
            lo_fraction: 1.0 / 64.0,
            hi_fraction: 1.0,
            points: 13,
        }
    }
}

impl TGridSpec {
    pub fn grid(&self, horizon: f64) -> Vec<f64> {
        geometric_grid(self.lo_fraction * horizon, self.hi_fraction * horizon, self.points)
    }
}

/// Excursion (inverse local time) statistics. Mark thresholds are in
/// units of the grid step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExcursionConfig {
    /// Marks at or below `hill_floor_cells * delta` are not used by the tail fits.
    pub hill_floor_cells: f64,
    /// `r` of the intensity ratio test.
    pub ratio_r_cells: f64,
    /// Local-time window `[0, window]` of the ratio and counting statistics.
    pub window: f64,
    /// Subdivisions `n` of the counting identity.
    pub counting_n: Vec<usize>,
    /// Heavy-jump threshold of the counting identity.
    pub counting_r_cells: f64,
    /// Number of leading paths whose point sets are written to `points.csv`.
    pub dump_paths: usize,
}

impl Default for ExcursionConfig {
    fn default() -> Self {
        Self {
            hill_floor_cells: 20.0,
            ratio_r_cells: 50.0,
            window: 1.0,
            counting_n: vec![1 << 10, 1 << 12],
            counting_r_cells: 50.0,
            dump_paths: 10,
        }
    }
}

/// Which invariance tests run, and at what parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TestConfig {
    pub self_similarity: bool,
    pub bi_scale: bool,
    pub stationarity: bool,
    /// Adds the mis-specified checks (wrong `H`, wrong `beta`) expected to reject.
    pub power_checks: bool,
    /// Time ratio `r` in `l(0, rT]` against `r^{1-H} l(0, T]`.
    pub self_similarity_r: f64,
    /// Offset added to `H` by the wrong-`H` power check.
    pub wrong_hurst_offset: f64,
    pub bi_scale_r: f64,
    pub bi_scale_window: f64,
    pub bi_scale_min_mark_cells: f64,
    /// Upper end of the counted mark band as a multiple of the lower end;
    /// `None` counts every mark above it.
    pub bi_scale_mark_band: Option<f64>,
    /// `x0` and `h` of the increment-stationarity test.
    pub stationarity_x0: f64,
    pub stationarity_h: f64,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            self_similarity: true,
            bi_scale: true,
            stationarity: true,
            power_checks: true,
            self_similarity_r: 0.25,
            wrong_hurst_offset: 0.2,
            bi_scale_r: 2.0,
            bi_scale_window: 1.0,
            bi_scale_min_mark_cells: 20.0,
            bi_scale_mark_band: Some(10.0),
            stationarity_x0: 1.0,
            stationarity_h: 1.0,
        }
    }
}

fn default_threshold() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub process: ProcessSpec,
    pub n_paths: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub epsilon_rule: EpsilonRule,
    /// Local-time level `a` of the persistence event `l(0, T] <= a`.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub t_grid: TGridSpec,
    /// Exponent fit range; defaults to `[horizon / 64, horizon / 4]`.
    #[serde(default)]
    pub fit_range: Option<(f64, f64)>,
    #[serde(default)]
    pub excursions: ExcursionConfig,
    #[serde(default)]
    pub tests: TestConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Worker-count hint; results do not depend on it.
    #[serde(default)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    /// Config with every optional section at its default.
    pub fn new(process: ProcessSpec, n_paths: u64, master_seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            process,
            n_paths,
            master_seed,
            epsilon_rule: EpsilonRule::default(),
            threshold: 1.0,
            t_grid: TGridSpec::default(),
            fit_range: None,
            excursions: ExcursionConfig::default(),
            tests: TestConfig::default(),
            output_dir: None,
            workers: None,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn t_grid(&self) -> Vec<f64> {
        self.t_grid.grid(self.process.horizon)
    }

    pub fn fit_range(&self) -> (f64, f64) {
        self.fit_range
            .unwrap_or_else(|| default_fit_range(self.process.horizon))
    }

    /// `1/(1 - H)`.
    pub fn beta(&self) -> f64 {
        1.0 / (1.0 - self.process.hurst)
    }

    /// Checks the invariants; every failure is [`Error::Config`].
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        self.process
            .validate()
            .map_err(|e| Error::Config(format!("process: {e}")))?;
        if self.n_paths == 0 {
            return bad("n_paths must be at least 1".into());
        }
        if !(self.threshold > 0.0) {
            return bad(format!("threshold must be positive, got {}", self.threshold));
        }
        if !(self.epsilon_rule.scale > 0.0) {
            return bad("epsilon_rule.scale must be positive".into());
        }
        let g = &self.t_grid;
        if !(g.lo_fraction > 0.0 && g.lo_fraction < g.hi_fraction && g.hi_fraction <= 1.0) || g.points < 2 {
            return bad(format!(
                "t_grid must satisfy 0 < lo_fraction < hi_fraction <= 1 with at least 2 points, got {g:?}"
            ));
        }
        let horizon = self.process.horizon;
        let (lo, hi) = self.fit_range();
        if !(lo > 0.0 && lo < hi && hi <= horizon) {
            return bad(format!("fit_range [{lo}, {hi}] must lie within (0, {horizon}]"));
        }
        let e = &self.excursions;
        if !(e.hill_floor_cells > 0.0 && e.ratio_r_cells > 0.0 && e.counting_r_cells > 0.0 && e.window > 0.0) {
            return bad("excursion thresholds and window must be positive".into());
        }
        if e.counting_n.contains(&0) {
            return bad("counting_n entries must be at least 1".into());
        }
        let t = &self.tests;
        if !(t.self_similarity_r > 0.0 && t.self_similarity_r <= 1.0) {
            return bad(format!("self_similarity_r must lie in (0, 1], got {}", t.self_similarity_r));
        }
        if self.process.hurst + t.wrong_hurst_offset >= 1.0 || self.process.hurst + t.wrong_hurst_offset < 0.0 {
            return bad("hurst + wrong_hurst_offset must lie in [0, 1)".into());
        }
        if !(t.bi_scale_r > 0.0 && t.bi_scale_window > 0.0 && t.bi_scale_min_mark_cells > 0.0) {
            return bad("bi-scale parameters must be positive".into());
        }
        if t.bi_scale_mark_band.is_some_and(|b| !(b > 1.0)) {
            return bad("bi_scale_mark_band must exceed 1".into());
        }
        if !(t.stationarity_x0 >= 0.0 && t.stationarity_h > 0.0) {
            return bad("stationarity needs x0 >= 0 and h > 0".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        Ok(())
    }

    /// Acceptance tolerance on `kappa_hat`.
    pub fn kappa_tolerance(&self) -> f64 {
        match self.process.family {
            Family::Rosenblatt => 0.08,
            _ => 0.05,
        }
    }
}
