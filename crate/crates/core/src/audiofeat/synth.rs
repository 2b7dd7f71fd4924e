//! Seeded Gaussian-cluster features standing in for extracted audio
//! features in desk-scale runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-class mean vectors sharing one isotropic σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub means: Vec<Vec<f64>>,
    pub sigma: f64,
}

impl ClusterSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        let dim = self.means.first().map(Vec::len).unwrap_or(0);
        if dim == 0 || self.means.iter().any(|m| m.len() != dim) {
            return Err(Error::InvalidArgument(
                "cluster means must share a non-zero dimension".into(),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFeature {
    pub values: Vec<f64>,
    pub label: usize,
}

/// Draws one point from N(mean, σ²I).
pub fn gaussian_point<R: Rng>(mean: &[f64], sigma: f64, rng: &mut R) -> Vec<f64> {
    mean.iter()
        .map(|&m| {
            let z: f64 = rng.sample(StandardNormal);
            m + sigma * z
        })
        .collect()
}

/// `n` samples with labels cycling through the clusters.
pub fn synth_features(spec: &ClusterSpec, n: usize, seed: u64) -> Result<Vec<LabeledFeature>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|i| {
            let label = i % spec.means.len();
            LabeledFeature {
                values: gaussian_point(&spec.means[label], spec.sigma, &mut rng),
                label,
            }
        })
        .collect())
}
