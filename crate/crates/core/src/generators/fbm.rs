//! Fractional Brownian motion via circulant embedding of fractional
//! Gaussian noise.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{path_rng, CirculantSampler, Family, ProcessSpec, SamplePath};
use crate::error::{check_hurst, Error, Result};

/// `Cov(B_s, B_t) = (|s|^{2H} + |t|^{2H} - |s - t|^{2H}) / 2`.
pub fn fbm_covariance(hurst: f64, s: f64, t: f64) -> Result<f64> {
    check_hurst(hurst)?;
    let two_h = 2.0 * hurst;
    Ok(0.5 * (s.abs().powf(two_h) + t.abs().powf(two_h) - (s - t).abs().powf(two_h)))
}

/// Autocovariance of unit-step increments of fractional Brownian motion.
pub fn fgn_covariance(hurst: f64, lag: usize) -> Result<f64> {
    check_hurst(hurst)?;
    Ok(fgn_autocov_unchecked(hurst, lag))
}

fn fgn_autocov_unchecked(hurst: f64, lag: usize) -> f64 {
    if lag == 0 {
        return 1.0;
    }
    let two_h = 2.0 * hurst;
    let k = lag as f64;
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).powf(two_h))
}

#[derive(Debug)]
pub struct FbmGenerator {
    spec: ProcessSpec,
    // None for Brownian motion: increments are i.i.d.
    sampler: Option<CirculantSampler>,
    step_scale: f64,
}

impl FbmGenerator {
    pub fn new(spec: &ProcessSpec) -> Result<Self> {
        spec.validate()?;
        if spec.family == Family::Rosenblatt {
            return Err(Error::InvalidParameter(
                "FbmGenerator needs family FBM or BM".into(),
            ));
        }
        let n = spec.grid_size;
        let sampler = if spec.hurst == 0.5 {
            None
        } else {
            let h = spec.hurst;
            Some(CirculantSampler::new(n, |k| fgn_autocov_unchecked(h, k))?)
        };
        Ok(Self {
            spec: spec.clone(),
            sampler,
            step_scale: spec.delta().powf(spec.hurst),
        })
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    pub fn sample(&self, seed: u64) -> SamplePath {
        let n = self.spec.grid_size;
        let mut rng = path_rng(seed);
        let mut noise = Vec::with_capacity(n);
        match &self.sampler {
            Some(s) => s.sample_into(&mut rng, &mut noise),
            None => noise.extend((0..n).map(|_| rng.sample::<f64, _>(StandardNormal))),
        }
        let mut values = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for z in noise {
            acc += self.step_scale * z;
            values.push(acc);
        }
        SamplePath {
            spec: self.spec.clone(),
            seed,
            values,
            normalization: None,
        }
    }
}

/// Samples fractional (or standard) Brownian motion on the spec grid.
pub fn sample_fbm(spec: &ProcessSpec, seed: u64) -> Result<SamplePath> {
    Ok(FbmGenerator::new(spec)?.sample(seed))
}
