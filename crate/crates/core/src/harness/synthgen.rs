//! Writes synthetic benchmark inputs to disk: a cluster manifest with its
//! materialized features, or a small WAV corpus with a glob manifest.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::{ExperimentConfig, Standardize, SyntheticKind};
use crate::audiofeat::{encode_wav, FeatureCache, FeatureConfig, LogMelConfig, PcmClip, PoolMode};
use crate::error::{Error, Result};
use crate::scenarios::{
    build_stream, BuildOptions, ClassEntry, Manifest, ScenarioKind, SplitCounts, TaskEntry,
};
use crate::strategies::StrategyConfig;

/// Files written by [`generate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub manifest: PathBuf,
    /// Materialized features (cluster mode) or extracted features (audio mode).
    pub features: PathBuf,
    pub config: PathBuf,
    pub wav_files: usize,
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Cluster mode: `manifest.json`, `features.fea` (every sample, task
/// order, train before test) and a Naive `config.json` referencing the
/// manifest.
pub fn generate(kind: SyntheticKind, seed: u64, out: &Path) -> Result<Generated> {
    let manifest = kind.manifest(seed);
    let stream = build_stream(&manifest, &BuildOptions::default())?;
    let mut rows = Vec::new();
    for t in &stream.tasks {
        for set in [&t.train, &t.test] {
            rows.extend((0..set.len()).map(|i| set.features.row(i).to_vec()));
        }
    }
    let cache = FeatureCache::from_f64(manifest.hash(), stream.feature_dim(), &rows)?;
    let m_path = out.join("manifest.json");
    let f_path = out.join("features.fea");
    write(&m_path, manifest.to_json().as_bytes())?;
    cache.write(&f_path)?;
    let config = ExperimentConfig {
        manifest: Some("manifest.json".into()),
        standardize: Some(Standardize::None),
        output_dir: Some("runs".into()),
        seed,
        ..ExperimentConfig::default()
    };
    let c_path = out.join("config.json");
    write(&c_path, config.to_json().as_bytes())?;
    Ok(Generated {
        manifest: m_path,
        features: f_path,
        config: c_path,
        wav_files: 0,
    })
}

pub const AUDIO_SAMPLE_RATE: u32 = 16000;
pub const AUDIO_CLIP_SECONDS: f64 = 1.0;
pub const AUDIO_TASKS: usize = 3;
pub const AUDIO_TRAIN_PER_CLASS: usize = 8;
pub const AUDIO_TEST_PER_CLASS: usize = 4;

/// Feature settings for the generated WAV corpus (1-second clips).
pub fn audio_feature_config() -> FeatureConfig {
    FeatureConfig {
        logmel: LogMelConfig {
            clip_seconds: AUDIO_CLIP_SECONDS,
            ..LogMelConfig::default()
        },
        pooling: PoolMode::MeanStd,
    }
}

/// Tone clip: fundamental `f0`, optional harmonic at `2·f0` with weight
/// `harmonic`, white noise of standard deviation `noise`.
fn tone<R: Rng>(f0: f64, harmonic: f64, noise: f64, rng: &mut R) -> PcmClip {
    let n = (AUDIO_SAMPLE_RATE as f64 * AUDIO_CLIP_SECONDS) as usize;
    let phase = rng.random_range(0.0..2.0 * PI);
    let gauss = Normal::new(0.0, noise).expect("noise std is finite");
    let sr = AUDIO_SAMPLE_RATE as f64;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / sr;
            let s = 0.3 * (2.0 * PI * f0 * t + phase).sin()
                + 0.3 * harmonic * (4.0 * PI * f0 * t + phase).sin();
            (s + gauss.sample(rng)).clamp(-1.0, 1.0)
        })
        .collect();
    PcmClip {
        sample_rate: AUDIO_SAMPLE_RATE,
        samples,
    }
}

/// Audio mode: a 3-task WAV corpus of the given scenario under
/// `out/audio/`, a glob manifest, a feature cache and a config.
///
/// CI classes are tones at distinct pitches. DI tasks share the labels
/// normal (pure tone) and abnormal (tone plus octave), with the pitch and
/// noise level shifting per task.
pub fn generate_audio(scenario: ScenarioKind, seed: u64, out: &Path) -> Result<Generated> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tasks = Vec::new();
    let mut files = 0;
    for t in 0..AUDIO_TASKS {
        let mut classes = Vec::new();
        for c in 0..2 {
            let (label, f0, harmonic, noise) = match scenario {
                ScenarioKind::CI => (
                    format!("machine{}", 2 * t + c),
                    250.0 * (1.5f64).powi((2 * t + c) as i32),
                    0.0,
                    0.02,
                ),
                ScenarioKind::DI => {
                    let label = if c == 0 { "normal" } else { "abnormal" };
                    (
                        label.to_string(),
                        300.0 + 150.0 * t as f64,
                        c as f64,
                        0.02 * (t + 1) as f64,
                    )
                }
            };
            for (split, count) in [
                ("train", AUDIO_TRAIN_PER_CLASS),
                ("test", AUDIO_TEST_PER_CLASS),
            ] {
                for i in 0..count {
                    let clip = tone(f0, harmonic, noise, &mut rng);
                    let path = out.join(format!("audio/task{}/{split}/{label}_{i:03}.wav", t + 1));
                    write(&path, &encode_wav(&clip)?)?;
                    files += 1;
                }
            }
            classes.push(ClassEntry {
                label: label.clone(),
                train_glob: Some(format!("audio/task{}/train/{label}_*.wav", t + 1)),
                test_glob: Some(format!("audio/task{}/test/{label}_*.wav", t + 1)),
                cluster: None,
                count: SplitCounts {
                    train: AUDIO_TRAIN_PER_CLASS,
                    test: AUDIO_TEST_PER_CLASS,
                },
            });
        }
        tasks.push(TaskEntry {
            name: format!("task{}", t + 1),
            classes,
        });
    }
    let manifest = Manifest {
        scenario,
        tasks,
        seed,
        features: Some(audio_feature_config()),
    };
    let m_path = out.join("manifest.json");
    write(&m_path, manifest.to_json().as_bytes())?;
    let f_path = out.join("features.fea");
    let opts = BuildOptions {
        base_dir: Some(out.to_path_buf()),
        cache: Some(f_path.clone()),
    };
    build_stream(&manifest, &opts)?;
    let config = ExperimentConfig {
        manifest: Some("manifest.json".into()),
        feature_cache: Some("features.fea".into()),
        strategy: StrategyConfig::default(),
        output_dir: Some("runs".into()),
        seed,
        ..ExperimentConfig::default()
    };
    let c_path = out.join("config.json");
    write(&c_path, config.to_json().as_bytes())?;
    Ok(Generated {
        manifest: m_path,
        features: f_path,
        config: c_path,
        wav_files: files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audiofeat::read_wav;

    #[test]
    fn cluster_mode_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let g = generate(SyntheticKind::StandardCi, 2, dir.path()).unwrap();
        let m = Manifest::load(&g.manifest).unwrap();
        assert_eq!(m, SyntheticKind::StandardCi.manifest(2));
        let cache = FeatureCache::read(&g.features).unwrap();
        assert_eq!(cache.manifest_hash, m.hash());
        assert_eq!(cache.rows.len(), 13 * 140);
        let cfg = ExperimentConfig::load(&g.config).unwrap();
        cfg.validate().unwrap();
    }

    #[test]
    fn audio_mode_writes_readable_clips() {
        let dir = tempfile::tempdir().unwrap();
        let g = generate_audio(ScenarioKind::CI, 1, dir.path()).unwrap();
        assert_eq!(
            g.wav_files,
            AUDIO_TASKS * 2 * (AUDIO_TRAIN_PER_CLASS + AUDIO_TEST_PER_CLASS)
        );
        let clip = read_wav(&dir.path().join("audio/task1/train/machine0_000.wav")).unwrap();
        assert_eq!(clip.samples.len(), 16000);
        let cache = FeatureCache::read(&g.features).unwrap();
        assert_eq!(cache.dim, 128);
    }
}
