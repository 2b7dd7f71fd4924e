use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::manifest::{ClassEntry, Manifest, ScenarioKind, SplitCounts};
use crate::audiofeat::{extract_files, gaussian_point, FeatureCache, FeatureConfig};
use crate::error::{Error, Result};
use crate::ndcore::Tensor2;

/// Feature rows with labels and stable sample identities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSet {
    pub features: Tensor2,
    pub labels: Vec<usize>,
    pub ids: Vec<u64>,
}

impl LabeledSet {
    pub fn empty(dim: usize) -> Self {
        Self {
            features: Tensor2::zeros(0, dim),
            labels: Vec::new(),
            ids: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn push(&mut self, row: &[f64], label: usize, id: u64) -> Result<()> {
        self.features.push_row(row)?;
        self.labels.push(label);
        self.ids.push(id);
        Ok(())
    }

    pub fn extend_from(&mut self, other: &LabeledSet) -> Result<()> {
        for i in 0..other.len() {
            self.push(other.features.row(i), other.labels[i], other.ids[i])?;
        }
        Ok(())
    }

    pub fn select(&self, idx: &[usize]) -> LabeledSet {
        LabeledSet {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            ids: idx.iter().map(|&i| self.ids[i]).collect(),
        }
    }

    pub fn class_counts(&self) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for &y in &self.labels {
            *m.entry(y).or_insert(0) += 1;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    /// 1-based position in the stream.
    pub id: usize,
    pub name: String,
    pub train: LabeledSet,
    pub test: LabeledSet,
    pub label_set: BTreeSet<usize>,
    pub declared: SplitCounts,
}

/// Ordered tasks with a global label space; immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskStream {
    pub kind: ScenarioKind,
    pub tasks: Vec<Task>,
    /// Class names indexed by global class id.
    pub class_names: Vec<String>,
}

impl TaskStream {
    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.tasks.first().map_or(0, |t| t.train.dim())
    }

    /// 1-based task access.
    pub fn task(&self, t: usize) -> Result<&Task> {
        if t == 0 || t > self.tasks.len() {
            return Err(Error::InvalidArgument(format!(
                "task {t} out of range 1..={}",
                self.tasks.len()
            )));
        }
        Ok(&self.tasks[t - 1])
    }

    pub fn global_label_space(&self) -> BTreeSet<usize> {
        self.tasks
            .iter()
            .flat_map(|t| t.label_set.iter().copied())
            .collect()
    }

    /// Union of label sets of tasks `1..=t`.
    pub fn seen_classes(&self, t: usize) -> Result<BTreeSet<usize>> {
        self.task(t)?;
        Ok(self.tasks[..t]
            .iter()
            .flat_map(|k| k.label_set.iter().copied())
            .collect())
    }

    pub fn seen_class_names(&self, t: usize) -> Result<Vec<String>> {
        Ok(self
            .seen_classes(t)?
            .into_iter()
            .map(|c| self.class_names[c].clone())
            .collect())
    }

    /// Test samples of every task up to `t`, the evaluation pool at session t.
    pub fn seen_test_pool(&self, t: usize) -> Result<LabeledSet> {
        self.task(t)?;
        let mut pool = LabeledSet::empty(self.feature_dim());
        for k in &self.tasks[..t] {
            pool.extend_from(&k.test)?;
        }
        Ok(pool)
    }

    /// Standardizes each task with mean and std of its own train split.
    pub fn standardized_per_task(&self) -> TaskStream {
        let mut out = self.clone();
        for task in &mut out.tasks {
            let (n, d) = task.train.features.shape();
            if n == 0 {
                continue;
            }
            let mut mean = vec![0.0; d];
            for r in 0..n {
                for (m, v) in mean.iter_mut().zip(task.train.features.row(r)) {
                    *m += v;
                }
            }
            mean.iter_mut().for_each(|m| *m /= n as f64);
            let mut var = vec![0.0; d];
            for r in 0..n {
                for ((s, v), m) in var.iter_mut().zip(task.train.features.row(r)).zip(&mean) {
                    *s += (v - m) * (v - m);
                }
            }
            let scale: Vec<f64> = var
                .iter()
                .map(|s| {
                    let sd = (s / n as f64).sqrt();
                    if sd > 1e-12 {
                        1.0 / sd
                    } else {
                        1.0
                    }
                })
                .collect();
            for set in [&mut task.train, &mut task.test] {
                for r in 0..set.len() {
                    for ((v, m), s) in set.features.row_mut(r).iter_mut().zip(&mean).zip(&scale) {
                        *v = (*v - m) * s;
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    /// Directory that relative globs resolve against.
    pub base_dir: Option<PathBuf>,
    /// FEA1 cache for file-sourced features.
    pub cache: Option<PathBuf>,
}

pub(crate) fn hash64(parts: &[&[u8]]) -> u64 {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

#[derive(Clone, Copy)]
enum Split {
    Train,
    Test,
}

impl Split {
    fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// A planned sample before features are materialized.
enum Planned {
    File(PathBuf),
    Cluster {
        mean: Vec<f64>,
        sigma: f64,
        rng_seed: u64,
    },
}

struct PlannedSample {
    task: usize,
    split: Split,
    label: usize,
    id: u64,
    source: Planned,
}

fn resolve_glob(pattern: &str, opts: &BuildOptions) -> Result<Vec<PathBuf>> {
    let full = match &opts.base_dir {
        Some(base) if !Path::new(pattern).is_absolute() => {
            base.join(pattern).to_string_lossy().into_owned()
        }
        _ => pattern.to_string(),
    };
    let mut paths: Vec<PathBuf> = glob::glob(&full)
        .map_err(|e| Error::Manifest(format!("bad glob {pattern}: {e}")))?
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Manifest(format!("glob {pattern}: {e}")))?;
    paths.sort();
    Ok(paths)
}

fn plan_split(
    manifest: &Manifest,
    task_idx: usize,
    class: &ClassEntry,
    label: usize,
    split: Split,
    opts: &BuildOptions,
    out: &mut Vec<PlannedSample>,
) -> Result<()> {
    let (glob, declared) = match split {
        Split::Train => (&class.train_glob, class.count.train),
        Split::Test => (&class.test_glob, class.count.test),
    };
    let task_name = &manifest.tasks[task_idx].name;
    match glob {
        Some(pattern) => {
            let files = resolve_glob(pattern, opts)?;
            if files.len() != declared {
                return Err(Error::Manifest(format!(
                    "task {task_name} class {} {}: declared {declared} files, found {}",
                    class.label,
                    split.name(),
                    files.len()
                )));
            }
            for f in files {
                let id = hash64(&[b"file", f.to_string_lossy().as_bytes()]);
                out.push(PlannedSample {
                    task: task_idx,
                    split,
                    label,
                    id,
                    source: Planned::File(f),
                });
            }
        }
        None => {
            let cl = class.cluster.as_ref().expect("checked by manifest shape");
            let rng_seed = hash64(&[
                b"cluster",
                &manifest.seed.to_le_bytes(),
                &(task_idx as u64).to_le_bytes(),
                class.label.as_bytes(),
                split.name().as_bytes(),
            ]);
            for i in 0..declared {
                let id = hash64(&[&rng_seed.to_le_bytes(), &(i as u64).to_le_bytes()]);
                out.push(PlannedSample {
                    task: task_idx,
                    split,
                    label,
                    id,
                    source: Planned::Cluster {
                        mean: cl.mean.clone(),
                        sigma: cl.sigma,
                        rng_seed,
                    },
                });
            }
        }
    }
    Ok(())
}

fn materialize(
    manifest: &Manifest,
    plan: &[PlannedSample],
    opts: &BuildOptions,
) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Option<Vec<f64>>> = vec![None; plan.len()];

    // clusters: one rng per (task, class, split), consumed in index order
    let mut rngs: BTreeMap<u64, ChaCha8Rng> = BTreeMap::new();
    for (k, p) in plan.iter().enumerate() {
        if let Planned::Cluster {
            mean,
            sigma,
            rng_seed,
            ..
        } = &p.source
        {
            let rng = rngs
                .entry(*rng_seed)
                .or_insert_with(|| ChaCha8Rng::seed_from_u64(*rng_seed));
            rows[k] = Some(gaussian_point(mean, *sigma, rng));
        }
    }

    let file_idx: Vec<usize> = plan
        .iter()
        .enumerate()
        .filter_map(|(k, p)| matches!(p.source, Planned::File(_)).then_some(k))
        .collect();
    if !file_idx.is_empty() {
        let cfg = manifest.features.clone().unwrap_or_default();
        let hash = manifest.hash();
        let cached = opts
            .cache
            .as_deref()
            .and_then(|p| FeatureCache::read_matching(p, &hash))
            .filter(|c| c.rows.len() == file_idx.len() && c.dim == cfg.dim());
        let feats = match cached {
            Some(c) => c.rows_f64(),
            None => {
                let paths: Vec<PathBuf> = file_idx
                    .iter()
                    .map(|&k| match &plan[k].source {
                        Planned::File(p) => p.clone(),
                        Planned::Cluster { .. } => unreachable!(),
                    })
                    .collect();
                let feats = extract_files(&paths, &cfg)?;
                if let Some(p) = &opts.cache {
                    FeatureCache::from_f64(hash, cfg.dim(), &feats)?.write(p)?;
                }
                feats
            }
        };
        for (k, f) in file_idx.into_iter().zip(feats) {
            rows[k] = Some(f);
        }
    }
    Ok(rows
        .into_iter()
        .map(|r| r.expect("every planned row filled"))
        .collect())
}

/// Extracts (or loads) the file-sourced features of a manifest into `cache`.
pub fn extract_manifest_features(manifest: &Manifest, opts: &BuildOptions) -> Result<FeatureCache> {
    let cache = opts
        .cache
        .clone()
        .ok_or_else(|| Error::InvalidArgument("feature extraction needs a cache path".into()))?;
    build_stream(manifest, opts)?;
    FeatureCache::read(&cache)
}

fn assemble(manifest: &Manifest, opts: &BuildOptions) -> Result<TaskStream> {
    manifest.check_shape()?;
    let mut class_ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut class_names = Vec::new();
    let mut plan = Vec::new();
    let mut label_sets = Vec::new();
    for (ti, task) in manifest.tasks.iter().enumerate() {
        let mut set = BTreeSet::new();
        for class in &task.classes {
            let next = class_names.len();
            let label = *class_ids.entry(class.label.clone()).or_insert_with(|| {
                class_names.push(class.label.clone());
                next
            });
            if !set.insert(label) {
                return Err(Error::Manifest(format!(
                    "task {} lists class {} twice",
                    task.name, class.label
                )));
            }
            plan_split(manifest, ti, class, label, Split::Train, opts, &mut plan)?;
            plan_split(manifest, ti, class, label, Split::Test, opts, &mut plan)?;
        }
        label_sets.push(set);
    }
    let rows = materialize(manifest, &plan, opts)?;
    let dim = rows.first().map(Vec::len).unwrap_or(0);
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Manifest(
            "samples disagree on feature dimension".into(),
        ));
    }

    let mut tasks: Vec<Task> = manifest
        .tasks
        .iter()
        .zip(label_sets)
        .enumerate()
        .map(|(ti, (entry, label_set))| Task {
            id: ti + 1,
            name: entry.name.clone(),
            train: LabeledSet::empty(dim),
            test: LabeledSet::empty(dim),
            label_set,
            declared: SplitCounts {
                train: entry.classes.iter().map(|c| c.count.train).sum(),
                test: entry.classes.iter().map(|c| c.count.test).sum(),
            },
        })
        .collect();
    for (p, row) in plan.iter().zip(&rows) {
        let task = &mut tasks[p.task];
        let set = match p.split {
            Split::Train => &mut task.train,
            Split::Test => &mut task.test,
        };
        set.push(row, p.label, p.id)?;
    }
    Ok(TaskStream {
        kind: manifest.scenario,
        tasks,
        class_names,
    })
}

/// Domain-incremental stream: every task shares one label set.
pub fn build_di_stream(manifest: &Manifest, opts: &BuildOptions) -> Result<TaskStream> {
    if manifest.scenario != ScenarioKind::DI {
        return Err(Error::Manifest(format!(
            "expected a DI manifest, got {}",
            manifest.scenario
        )));
    }
    let stream = assemble(manifest, opts)?;
    let first = &stream.tasks[0].label_set;
    if let Some(t) = stream.tasks.iter().find(|t| &t.label_set != first) {
        return Err(Error::Manifest(format!(
            "DI task {} has label set {:?}, task 1 has {:?}",
            t.name,
            names(&stream, &t.label_set),
            names(&stream, first)
        )));
    }
    Ok(stream)
}

/// Class-incremental stream: label sets are pairwise disjoint.
pub fn build_ci_stream(manifest: &Manifest, opts: &BuildOptions) -> Result<TaskStream> {
    if manifest.scenario != ScenarioKind::CI {
        return Err(Error::Manifest(format!(
            "expected a CI manifest, got {}",
            manifest.scenario
        )));
    }
    let stream = assemble(manifest, opts)?;
    let mut seen = BTreeSet::new();
    for t in &stream.tasks {
        if let Some(c) = t.label_set.iter().find(|c| seen.contains(*c)) {
            return Err(Error::Manifest(format!(
                "CI task {} repeats class {} from an earlier task",
                t.name, stream.class_names[*c]
            )));
        }
        seen.extend(t.label_set.iter().copied());
    }
    Ok(stream)
}

pub fn build_stream(manifest: &Manifest, opts: &BuildOptions) -> Result<TaskStream> {
    match manifest.scenario {
        ScenarioKind::DI => build_di_stream(manifest, opts),
        ScenarioKind::CI => build_ci_stream(manifest, opts),
    }
}

/// Assembles without scenario checks, for validating malformed inputs.
pub fn build_unchecked(manifest: &Manifest, opts: &BuildOptions) -> Result<TaskStream> {
    assemble(manifest, opts)
}

fn names(stream: &TaskStream, set: &BTreeSet<usize>) -> Vec<String> {
    set.iter().map(|&c| stream.class_names[c].clone()).collect()
}

/// Feature config a manifest's file sources will be extracted with.
pub fn feature_config(manifest: &Manifest) -> FeatureConfig {
    manifest.features.clone().unwrap_or_default()
}
