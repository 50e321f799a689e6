use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// An estimate with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertainValue {
    pub mean: f64,
    pub sigma: f64,
}

impl UncertainValue {
    pub fn new(mean: f64, sigma: f64) -> Self {
        Self { mean, sigma }
    }

    pub fn exact(mean: f64) -> Self {
        Self { mean, sigma: 0.0 }
    }
}

impl std::fmt::Display for UncertainValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}±{}", self.mean, self.sigma)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent child seed for the stream identified by `tags`.
pub fn derive_seed(root: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(splitmix(root), |acc, &t| splitmix(acc ^ splitmix(t)))
}

/// ±1 shot outcomes with `P(+1) = (1 + exact)/2`, summarised as mean and
/// `sqrt((1 − mean²)/shots)`.
pub fn sample_from_value(exact: f64, shots: u64, rng: &mut ChaCha8Rng) -> Result<UncertainValue> {
    if shots == 0 {
        return Err(Error::InvalidParams("shots must be >= 1".into()));
    }
    if !exact.is_finite() {
        return Err(Error::InvalidParams(format!("expectation {exact} is not finite")));
    }
    let prob = ((1.0 + exact) / 2.0).clamp(0.0, 1.0);
    let ups = Binomial::new(shots, prob)
        .map_err(|e| Error::InvalidParams(format!("binomial: {e}")))?
        .sample(rng);
    let mean = (2.0 * ups as f64 - shots as f64) / shots as f64;
    let sigma = ((1.0 - mean * mean).max(0.0) / shots as f64).sqrt();
    Ok(UncertainValue { mean, sigma })
}

pub fn sample_expectation(rho: &DensityMatrix, o: &PauliString, shots: u64, seed: u64) -> Result<UncertainValue> {
    let exact = rho.expectation(o)?;
    sample_from_value(exact, shots, &mut ChaCha8Rng::seed_from_u64(seed))
}
