//! Audio ingestion and feature extraction: WAV decoding, fixed-length
//! clips, log-mel spectrograms, time pooling, plus a synthetic generator.

pub mod cache;
mod logmel;
mod pool;
mod synth;
mod wav;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cache::FeatureCache;
pub use logmel::{
    frame_count, hann, hz_to_mel, logmel, mel_filterbank, mel_to_hz, stft_power, LogMelConfig,
};
pub use pool::{pool, PoolMode};
pub use synth::{gaussian_point, synth_features, ClusterSpec, LabeledFeature};
pub use wav::{encode_wav, read_wav, read_wav_at, read_wav_bytes, trim_pad, PcmClip};

use crate::error::Result;

/// Everything needed to turn a WAV file into a fixed-length vector.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    #[serde(flatten)]
    pub logmel: LogMelConfig,
    pub pooling: PoolMode,
}

impl FeatureConfig {
    pub fn dim(&self) -> usize {
        self.pooling.output_dim(self.logmel.mel_bins)
    }
}

pub fn extract_clip(clip: &PcmClip, cfg: &FeatureConfig) -> Result<Vec<f64>> {
    let clip = trim_pad(clip, cfg.logmel.clip_seconds)?;
    let spec = logmel(&clip, &cfg.logmel)?;
    pool(&spec, cfg.pooling)
}

/// read → trim/pad → log-mel → pool.
pub fn extract_file(path: &Path, cfg: &FeatureConfig) -> Result<Vec<f64>> {
    let clip = read_wav_at(path, cfg.logmel.sample_rate)?;
    extract_clip(&clip, cfg)
}

/// Extracts every file in parallel; output order follows `paths`.
pub fn extract_files(paths: &[PathBuf], cfg: &FeatureConfig) -> Result<Vec<Vec<f64>>> {
    cfg.logmel.validate()?;
    paths.par_iter().map(|p| extract_file(p, cfg)).collect()
}
