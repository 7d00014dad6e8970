//! Photon shot noise: Poisson-sampled counts per point, deterministic in
//! the seed and independent of evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use super::{ScanError, Spectrum};
use crate::digest::mix_seed;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("integration time must be positive, got {0}")]
    ZeroIntegrationTime(f64),
    #[error("cannot sample shot noise on a failed point (index {0})")]
    FailedPoint(usize),
}

/// Replace each point's rate by Poisson-sampled counts / integration time;
/// sigma is sqrt(expected counts) / integration time. Each point draws from
/// its own seeded stream, so the result does not depend on evaluation
/// order.
pub fn add_shot_noise(spectrum: &Spectrum, seed: u64) -> Result<Spectrum, NoiseError> {
    let t = spectrum.config.integration_time;
    if t <= 0.0 {
        return Err(NoiseError::ZeroIntegrationTime(t));
    }
    let mut out = spectrum.clone();
    for (i, p) in out.points.iter_mut().enumerate() {
        if !p.rate.is_finite() {
            return Err(NoiseError::FailedPoint(i));
        }
        let mean_counts = p.rate * t;
        let sampled = if mean_counts > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, i as u64));
            Poisson::new(mean_counts).expect("positive mean").sample(&mut rng)
        } else {
            0.0
        };
        p.rate = sampled / t;
        p.sigma = mean_counts.sqrt() / t;
    }
    Ok(out)
}

impl From<NoiseError> for ScanError {
    fn from(e: NoiseError) -> Self {
        ScanError::Io(e.to_string())
    }
}
