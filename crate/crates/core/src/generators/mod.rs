//! Sample paths of H-self-similar processes with stationary increments.
//!
//! Paths are one-sided on `[0, horizon]`, sampled on a uniform grid of
//! `grid_size` steps, and are a pure function of `(spec, seed)`.

mod circulant;
mod fbm;
mod rosenblatt;
mod seed;

pub use circulant::{embedding_size, CirculantSampler, NEGATIVE_EIGENVALUE_TOLERANCE};
pub use fbm::{fbm_covariance, fgn_covariance, sample_fbm, FbmGenerator};
pub use rosenblatt::{
    rosenblatt_autocovariance, sample_rosenblatt, RosenblattGenerator, DEFAULT_MICRO_FACTOR,
};
pub use seed::{derive_path_seed, mix64};

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_hurst, Error, Result};

/// Process family of a sample path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Family {
    Fbm,
    Bm,
    Rosenblatt,
}

fn default_micro_factor() -> usize {
    DEFAULT_MICRO_FACTOR
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSpec {
    pub family: Family,
    pub hurst: f64,
    /// Right end of the simulated time interval.
    pub horizon: f64,
    /// Number of grid steps; paths carry `grid_size + 1` values.
    pub grid_size: usize,
    /// Micro-lattice refinements per output step (Rosenblatt only).
    #[serde(default = "default_micro_factor")]
    pub micro_factor: usize,
}

impl ProcessSpec {
    pub fn fbm(hurst: f64, horizon: f64, grid_size: usize) -> Self {
        Self {
            family: Family::Fbm,
            hurst,
            horizon,
            grid_size,
            micro_factor: DEFAULT_MICRO_FACTOR,
        }
    }

    pub fn bm(horizon: f64, grid_size: usize) -> Self {
        Self {
            family: Family::Bm,
            hurst: 0.5,
            horizon,
            grid_size,
            micro_factor: DEFAULT_MICRO_FACTOR,
        }
    }

    pub fn rosenblatt(hurst: f64, horizon: f64, grid_size: usize, micro_factor: usize) -> Self {
        Self {
            family: Family::Rosenblatt,
            hurst,
            horizon,
            grid_size,
            micro_factor,
        }
    }

    /// Grid step.
    pub fn delta(&self) -> f64 {
        self.horizon / self.grid_size as f64
    }

    pub fn validate(&self) -> Result<()> {
        check_hurst(self.hurst)?;
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.grid_size < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid_size must be at least 2, got {}",
                self.grid_size
            )));
        }
        match self.family {
            Family::Bm if self.hurst != 0.5 => Err(Error::InvalidParameter(format!(
                "Brownian motion has hurst 1/2, got {}",
                self.hurst
            ))),
            Family::Rosenblatt if self.hurst <= 0.5 => Err(Error::InvalidParameter(format!(
                "Rosenblatt process requires hurst in (1/2, 1), got {}",
                self.hurst
            ))),
            Family::Rosenblatt if self.micro_factor == 0 => Err(Error::InvalidParameter(
                "micro_factor must be at least 1".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// A discretized trajectory `X_{k delta}`, `k = 0..=grid_size`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub spec: ProcessSpec,
    pub seed: u64,
    pub values: Vec<f64>,
    /// Variance-matching constant used for Rosenblatt paths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<f64>,
}

impl SamplePath {
    pub fn delta(&self) -> f64 {
        self.spec.delta()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.delta()
    }

    pub fn hurst(&self) -> f64 {
        self.spec.hurst
    }

    /// Value at the largest grid time not exceeding `t`.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = ((t / self.delta()).floor() as usize).min(self.values.len() - 1);
        self.values[k]
    }

    /// Writes `t,x` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,x")?;
        for (k, x) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", self.time(k), x)?;
        }
        Ok(())
    }
}

pub(crate) fn path_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Reusable sampler for one [`ProcessSpec`]; holds the precomputed
/// circulant spectrum so that many seeds can be drawn cheaply.
#[derive(Debug)]
pub enum PathGenerator {
    Fbm(FbmGenerator),
    Rosenblatt(RosenblattGenerator),
}

impl PathGenerator {
    pub fn new(spec: &ProcessSpec) -> Result<Self> {
        spec.validate()?;
        Ok(match spec.family {
            Family::Fbm | Family::Bm => Self::Fbm(FbmGenerator::new(spec)?),
            Family::Rosenblatt => Self::Rosenblatt(RosenblattGenerator::new(spec)?),
        })
    }

    pub fn spec(&self) -> &ProcessSpec {
        match self {
            Self::Fbm(g) => g.spec(),
            Self::Rosenblatt(g) => g.spec(),
        }
    }

    pub fn sample(&self, seed: u64) -> SamplePath {
        match self {
            Self::Fbm(g) => g.sample(seed),
            Self::Rosenblatt(g) => g.sample(seed),
        }
    }
}

/// One-shot sampling for any family.
pub fn sample_path(spec: &ProcessSpec, seed: u64) -> Result<SamplePath> {
    Ok(PathGenerator::new(spec)?.sample(seed))
}
