use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scenarios::synthetic::{
    dcase_ci_manifest, dcase_di_manifest, standard_ci_manifest, standard_di_manifest,
};
use crate::scenarios::{Manifest, ScenarioKind};
use crate::strategies::{StrategyConfig, StrategyKind, TrainConfig};

/// Built-in synthetic streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    /// 6 tasks, 13 Gaussian classes, 10σ apart.
    StandardCi,
    /// 6 binary tasks with shifted domains.
    StandardDi,
    /// CI stream with the DCASE-derived groups and split sizes.
    DcaseCi,
    /// DI stream with the DCASE-derived task names and split sizes.
    DcaseDi,
}

impl SyntheticKind {
    pub fn manifest(self, seed: u64) -> Manifest {
        match self {
            SyntheticKind::StandardCi => standard_ci_manifest(seed),
            SyntheticKind::StandardDi => standard_di_manifest(seed),
            SyntheticKind::DcaseCi => dcase_ci_manifest(seed),
            SyntheticKind::DcaseDi => dcase_di_manifest(seed),
        }
    }

    pub fn scenario(self) -> ScenarioKind {
        match self {
            SyntheticKind::StandardCi | SyntheticKind::DcaseCi => ScenarioKind::CI,
            SyntheticKind::StandardDi | SyntheticKind::DcaseDi => ScenarioKind::DI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSource {
    pub kind: SyntheticKind,
    /// Seed of the generated data, independent of the run seed.
    #[serde(default)]
    pub data_seed: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Standardize {
    /// Mean/std of each task's train split, applied to its train and test.
    #[default]
    PerTask,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub hidden_dims: Vec<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            hidden_dims: vec![64],
        }
    }
}

/// Everything that determines one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Stream manifest; relative paths resolve against the config file.
    pub manifest: Option<PathBuf>,
    /// Feature cache for file-sourced manifests.
    pub feature_cache: Option<PathBuf>,
    pub synthetic: Option<SyntheticSource>,
    pub strategy: StrategyConfig,
    pub model: ModelConfig,
    /// Unset values fall back to the scenario defaults.
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub seed: u64,
    /// Unset: per-task for manifests, none for synthetic sources, whose
    /// clusters already share one scale.
    pub standardize: Option<Standardize>,
    /// Parent of the `<config-hash>/` run directories; nothing is written when unset.
    pub output_dir: Option<PathBuf>,
    pub percent: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            feature_cache: None,
            synthetic: None,
            strategy: StrategyConfig::default(),
            model: ModelConfig::default(),
            epochs: None,
            batch_size: None,
            learning_rate: None,
            seed: 0,
            standardize: None,
            output_dir: None,
            percent: false,
        }
    }
}

impl ExperimentConfig {
    pub fn synthetic(kind: SyntheticKind, strategy: StrategyConfig, seed: u64) -> Self {
        Self {
            synthetic: Some(SyntheticSource {
                kind,
                data_seed: seed,
            }),
            strategy,
            seed,
            ..Default::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file, resolving relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub(crate) fn resolve_paths(&mut self, base: &Path) {
        for p in [
            &mut self.manifest,
            &mut self.feature_cache,
            &mut self.output_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.manifest, &self.synthetic) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "set either `manifest` or `synthetic`, not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config(
                    "one of `manifest` or `synthetic` is required".into(),
                ))
            }
            _ => {}
        }
        if self.model.hidden_dims.contains(&0) {
            return Err(Error::Config("hidden layer widths must be >= 1".into()));
        }
        self.strategy.validate()?;
        if let Some(0) = self.epochs {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if let Some(0) = self.batch_size {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        if let Some(lr) = self.learning_rate {
            if !(lr > 0.0) || !lr.is_finite() {
                return Err(Error::Config("learning rate must be > 0".into()));
            }
        }
        Ok(())
    }

    pub fn load_manifest(&self) -> Result<Manifest> {
        match (&self.manifest, &self.synthetic) {
            (Some(p), None) => Manifest::load(p),
            (None, Some(s)) => Ok(s.kind.manifest(s.data_seed)),
            _ => {
                self.validate()?;
                unreachable!("validate rejects both and neither")
            }
        }
    }

    /// Training settings with scenario defaults filled in.
    pub fn train_config(&self, scenario: ScenarioKind) -> TrainConfig {
        let base = match scenario {
            ScenarioKind::DI => TrainConfig::di_default(),
            ScenarioKind::CI => TrainConfig::ci_default(),
        };
        TrainConfig {
            epochs: self.epochs.unwrap_or(base.epochs),
            batch_size: self.batch_size.unwrap_or(base.batch_size),
            learning_rate: self.learning_rate.unwrap_or(base.learning_rate),
        }
    }

    pub fn standardization(&self) -> Standardize {
        self.standardize.unwrap_or(if self.synthetic.is_some() {
            Standardize::None
        } else {
            Standardize::PerTask
        })
    }

    /// Hex sha256 over the run-relevant fields and the manifest contents.
    /// Output location and percent mode do not enter the hash.
    pub fn hash(&self, manifest: &Manifest) -> String {
        let key = HashKey {
            synthetic: self.synthetic,
            strategy: &self.strategy,
            model: &self.model,
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            seed: self.seed,
            standardize: self.standardization(),
        };
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&key).expect("key serializes"));
        h.update(manifest.hash());
        hex::encode(h.finalize())
    }
}

#[derive(Serialize)]
struct HashKey<'a> {
    synthetic: Option<SyntheticSource>,
    strategy: &'a StrategyConfig,
    model: &'a ModelConfig,
    epochs: Option<usize>,
    batch_size: Option<usize>,
    learning_rate: Option<f64>,
    seed: u64,
    standardize: Standardize,
}

/// A base config plus hyperparameter lists expanded as a cartesian product.
/// Each list applies only to the strategies that read the parameter.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    #[serde(flatten)]
    pub base: ExperimentConfig,
    /// Strategies to run; defaults to the base strategy alone.
    pub strategies: Option<Vec<StrategyConfig>>,
    pub lambda: Option<Vec<f64>>,
    pub alpha: Option<Vec<f64>>,
    pub temperature: Option<Vec<f64>>,
    pub memory_size: Option<Vec<usize>>,
    pub per_task_memory: Option<Vec<usize>>,
    pub seeds: Option<Vec<u64>>,
    /// Upper bound on concurrently running cells.
    pub workers: Option<usize>,
}

impl GridConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base
            .resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    /// One config per combination, in list order (strategy, parameters, seed).
    pub fn expand(&self) -> Result<Vec<ExperimentConfig>> {
        fn list<T: Clone>(name: &str, v: &Option<Vec<T>>) -> Result<Option<Vec<T>>> {
            match v {
                Some(v) if v.is_empty() => {
                    Err(Error::Config(format!("grid list `{name}` is empty")))
                }
                other => Ok(other.clone()),
            }
        }
        let strategies = list("strategies", &self.strategies)?
            .unwrap_or_else(|| vec![self.base.strategy.clone()]);
        let lambda = list("lambda", &self.lambda)?;
        let alpha = list("alpha", &self.alpha)?;
        let temperature = list("temperature", &self.temperature)?;
        let memory = list("memory_size", &self.memory_size)?;
        let per_task = list("per_task_memory", &self.per_task_memory)?;
        let seeds = list("seeds", &self.seeds)?.unwrap_or_else(|| vec![self.base.seed]);
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be >= 1".into()));
        }

        let mut out = Vec::new();
        for s in strategies {
            let mut variants = vec![s.clone()];
            let mut vary = |values: &Option<Vec<f64>>, set: fn(&mut StrategyConfig, f64)| {
                if let Some(vals) = values {
                    variants = variants
                        .iter()
                        .flat_map(|v| {
                            vals.iter().map(move |&x| {
                                let mut c = v.clone();
                                set(&mut c, x);
                                c
                            })
                        })
                        .collect();
                }
            };
            match s.kind {
                StrategyKind::EWC | StrategyKind::SI => vary(&lambda, |c, x| c.lambda = x),
                StrategyKind::LwF => {
                    vary(&alpha, |c, x| c.alpha = x);
                    vary(&temperature, |c, x| c.temperature = x);
                }
                StrategyKind::Replay | StrategyKind::GDumb => {
                    let m = memory
                        .as_ref()
                        .map(|v| v.iter().map(|&x| x as f64).collect());
                    vary(&m, |c, x| c.memory_size = x as usize);
                }
                StrategyKind::GEM | StrategyKind::AGEM => {
                    let m = per_task
                        .as_ref()
                        .map(|v| v.iter().map(|&x| x as f64).collect());
                    vary(&m, |c, x| c.per_task_memory = x as usize);
                }
                _ => {}
            }
            for v in variants {
                for &seed in &seeds {
                    let mut cfg = self.base.clone();
                    cfg.strategy = v.clone();
                    cfg.seed = seed;
                    if let Some(s) = cfg.synthetic.as_mut() {
                        // a seed list varies the data as well as the run
                        if self.seeds.is_some() {
                            s.data_seed = seed;
                        }
                    }
                    out.push(cfg);
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_expansion() {
        let g = GridConfig::from_json(
            r#"{"synthetic": {"kind": "standard-ci"},
                "strategies": [{"kind": "EWC"}, {"kind": "Naive"}, {"kind": "Replay"}],
                "lambda": [0.5, 1, 2], "memory_size": [50, 100], "seeds": [1, 2]}"#,
        )
        .unwrap();
        let cells = g.expand().unwrap();
        assert_eq!(cells.len(), (3 + 1 + 2) * 2);
        let lambdas: Vec<f64> = cells
            .iter()
            .filter(|c| c.strategy.kind == StrategyKind::EWC && c.seed == 1)
            .map(|c| c.strategy.lambda)
            .collect();
        assert_eq!(lambdas, vec![0.5, 1.0, 2.0]);
        assert!(GridConfig::from_json(r#"{"lambda": []}"#)
            .unwrap()
            .expand()
            .is_err());
        assert!(GridConfig::from_json(r#"{"strategies": []}"#)
            .unwrap()
            .expand()
            .is_err());
    }

    #[test]
    fn config_validation_and_defaults() {
        let mut c =
            ExperimentConfig::synthetic(SyntheticKind::StandardCi, StrategyConfig::default(), 0);
        c.validate().unwrap();
        let t = c.train_config(ScenarioKind::CI);
        assert_eq!((t.epochs, t.batch_size, t.learning_rate), (30, 8, 1e-4));
        let t = c.train_config(ScenarioKind::DI);
        assert_eq!((t.epochs, t.learning_rate), (50, 1e-3));
        c.epochs = Some(0);
        assert!(c.validate().is_err());
        c.epochs = None;
        c.manifest = Some("m.json".into());
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_ignores_output_location() {
        let mut a =
            ExperimentConfig::synthetic(SyntheticKind::StandardDi, StrategyConfig::default(), 3);
        let m = a.load_manifest().unwrap();
        let h = a.hash(&m);
        a.output_dir = Some("elsewhere".into());
        a.percent = true;
        assert_eq!(a.hash(&m), h);
        a.seed = 4;
        assert_ne!(a.hash(&m), h);
        assert_eq!(h.len(), 64);
    }
}
