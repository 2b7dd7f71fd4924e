use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ndcore::Tensor2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoolMode {
    /// Per-bin mean over frames.
    #[default]
    Mean,
    /// Per-bin mean followed by per-bin population standard deviation.
    MeanStd,
}

impl PoolMode {
    pub fn output_dim(self, bins: usize) -> usize {
        match self {
            PoolMode::Mean => bins,
            PoolMode::MeanStd => 2 * bins,
        }
    }
}

/// Collapses a frames × bins matrix to a fixed-length vector.
pub fn pool(features: &Tensor2, mode: PoolMode) -> Result<Vec<f64>> {
    let (frames, bins) = features.shape();
    if frames == 0 || bins == 0 {
        return Err(Error::InvalidArgument(
            "cannot pool an empty feature matrix".into(),
        ));
    }
    let n = frames as f64;
    let mut mean = vec![0.0; bins];
    for f in 0..frames {
        for (m, v) in mean.iter_mut().zip(features.row(f)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    if mode == PoolMode::Mean {
        return Ok(mean);
    }
    let mut var = vec![0.0; bins];
    for f in 0..frames {
        for ((s, v), m) in var.iter_mut().zip(features.row(f)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let mut out = mean;
    out.extend(var.into_iter().map(|s| (s / n).sqrt()));
    Ok(out)
}
