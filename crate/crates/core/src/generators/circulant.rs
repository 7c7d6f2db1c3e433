//! Exact sampling of stationary Gaussian sequences by circulant embedding.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Negative eigenvalues smaller than this fraction of the largest are
/// floating-point noise and get clipped to zero.
pub const NEGATIVE_EIGENVALUE_TOLERANCE: f64 = 1e-10;

/// Smallest power of two that is at least `2 (len - 1)` (and at least 2).
pub fn embedding_size(len: usize) -> usize {
    (2 * len.saturating_sub(1)).max(2).next_power_of_two()
}

/// Precomputed square-root spectrum of the circulant embedding of an
/// autocovariance sequence. Sampling draws one complex white-noise vector
/// and applies one FFT; the real part has exactly the target covariance.
pub struct CirculantSampler {
    len: usize,
    weights: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantSampler")
            .field("len", &self.len)
            .field("embedding", &self.weights.len())
            .finish()
    }
}

impl CirculantSampler {
    pub fn new(len: usize, autocov: impl Fn(usize) -> f64) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidParameter("sequence length must be positive".into()));
        }
        let m = embedding_size(len);
        let mut row: Vec<Complex<f64>> = (0..m)
            .map(|k| Complex::new(autocov(k.min(m - k)), 0.0))
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut row);

        let max = row.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
        let mut weights = Vec::with_capacity(m);
        for c in &row {
            let mut lambda = c.re;
            if lambda < 0.0 {
                if -lambda > NEGATIVE_EIGENVALUE_TOLERANCE * max {
                    return Err(Error::Embedding { eigenvalue: lambda, max });
                }
                lambda = 0.0;
            }
            weights.push((lambda / m as f64).sqrt());
        }
        Ok(Self { len, weights, fft })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn embedding_len(&self) -> usize {
        self.weights.len()
    }

    /// Writes one exact sample of the stationary sequence into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        let mut buf: Vec<Complex<f64>> = self
            .weights
            .iter()
            .map(|&w| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(w * re, w * im)
            })
            .collect();
        self.fft.process(&mut buf);
        out.clear();
        out.extend(buf[..self.len].iter().map(|c| c.re));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn embedding_sizes() {
        assert_eq!(embedding_size(2), 2);
        assert_eq!(embedding_size(3), 4);
        assert_eq!(embedding_size(1 << 16), 1 << 17);
        assert_eq!(embedding_size((1 << 16) + 1), 1 << 17);
        assert_eq!(embedding_size((1 << 16) + 2), 1 << 18);
    }

    #[test]
    fn rejects_non_psd_sequence() {
        // r(0) = 1, r(1) = 0.9, r(k >= 2) = -0.9 is not a covariance.
        let err = CirculantSampler::new(8, |k| match k {
            0 => 1.0,
            1 => 0.9,
            _ => -0.9,
        })
        .unwrap_err();
        assert!(matches!(err, Error::Embedding { .. }));
    }

    #[test]
    fn white_noise_has_unit_variance() {
        let sampler = CirculantSampler::new(64, |k| if k == 0 { 1.0 } else { 0.0 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut out = Vec::new();
        let mut sum_sq = 0.0;
        let reps = 2000;
        for _ in 0..reps {
            sampler.sample_into(&mut rng, &mut out);
            sum_sq += out.iter().map(|x| x * x).sum::<f64>();
        }
        let var = sum_sq / (reps * 64) as f64;
        assert!((var - 1.0).abs() < 0.02, "variance {var}");
    }
}
