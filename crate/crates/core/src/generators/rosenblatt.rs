//! Rosenblatt process by the Hermite-rank-2 lattice scheme: partial sums of
//! `xi_i^2 - 1` for a long-memory Gaussian sequence `xi`.

use super::{path_rng, CirculantSampler, Family, ProcessSpec, SamplePath};
use crate::error::{Error, Result};

pub const DEFAULT_MICRO_FACTOR: usize = 16;

/// Micro-lattice autocovariance `(1 + k)^{-(1 - H)}`.
pub fn rosenblatt_autocovariance(hurst: f64, lag: usize) -> f64 {
    (1.0 + lag as f64).powf(-(1.0 - hurst))
}

/// Exact variance of `sum_{i < m} (xi_i^2 - 1)`.
fn partial_sum_variance(hurst: f64, m: usize) -> f64 {
    let mf = m as f64;
    let mut acc = mf;
    for k in 1..m {
        let rho = rosenblatt_autocovariance(hurst, k);
        acc += 2.0 * (mf - k as f64) * rho * rho;
    }
    2.0 * acc
}

#[derive(Debug)]
pub struct RosenblattGenerator {
    spec: ProcessSpec,
    sampler: CirculantSampler,
    normalization: f64,
}

impl RosenblattGenerator {
    pub fn new(spec: &ProcessSpec) -> Result<Self> {
        spec.validate()?;
        if spec.family != Family::Rosenblatt {
            return Err(Error::InvalidParameter(
                "RosenblattGenerator needs family ROSENBLATT".into(),
            ));
        }
        let h = spec.hurst;
        let micro_len = spec.grid_size * spec.micro_factor;
        let sampler = CirculantSampler::new(micro_len, |k| rosenblatt_autocovariance(h, k))?;
        // Var(X_horizon) = horizon^{2H}, so that Var(X_1) = 1 up to lattice bias.
        let normalization =
            (partial_sum_variance(h, micro_len) / spec.horizon.powf(2.0 * h)).sqrt();
        Ok(Self {
            spec: spec.clone(),
            sampler,
            normalization,
        })
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    /// Divisor applied to the raw partial sums.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn sample(&self, seed: u64) -> SamplePath {
        let mut rng = path_rng(seed);
        let mut xi = Vec::new();
        self.sampler.sample_into(&mut rng, &mut xi);
        let n = self.spec.grid_size;
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for chunk in xi.chunks_exact(self.spec.micro_factor) {
            acc += chunk.iter().map(|x| x * x - 1.0).sum::<f64>();
            values.push(acc / self.normalization);
        }
        SamplePath {
            spec: self.spec.clone(),
            seed,
            values,
            normalization: Some(self.normalization),
        }
    }
}

pub fn sample_rosenblatt(spec: &ProcessSpec, seed: u64) -> Result<SamplePath> {
    Ok(RosenblattGenerator::new(spec)?.sample(seed))
}
