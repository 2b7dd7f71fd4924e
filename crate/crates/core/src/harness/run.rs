use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Standardize};
use crate::error::{Error, Result};
use crate::metrics::{matrix_to_csv, AccuracyMatrix, CurveMode, MatrixSidecar, MetricSummary};
use crate::ndcore::{Model, ModelSpec};
use crate::scenarios::{build_stream, validate_stream, BuildOptions, ScenarioKind, TaskStream};
use crate::strategies::{Diagnostics, Learner, SeedSet, StrategyKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub session: usize,
    pub accuracy: f64,
}

/// Outcome of one run. Matrix, metrics and curve are stored as fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub label: String,
    pub strategy: StrategyKind,
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub tasks: usize,
    pub matrix: AccuracyMatrix,
    pub metrics: MetricSummary,
    /// DI: mean over all tasks' test sets; CI: accuracy on the seen-class
    /// test pool.
    pub curve: Vec<CurvePoint>,
    pub session_seconds: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl RunRecord {
    /// Equality on everything except wall-clock timings.
    pub fn same_outcome(&self, other: &RunRecord) -> bool {
        let strip = |r: &RunRecord| RunRecord {
            session_seconds: Vec::new(),
            ..r.clone()
        };
        strip(self) == strip(other)
    }

    pub fn load(path: &Path) -> Result<RunRecord> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Builds, validates and optionally standardizes the configured stream.
pub fn prepare_stream(
    config: &ExperimentConfig,
) -> Result<(crate::scenarios::Manifest, TaskStream)> {
    config.validate()?;
    let manifest = config.load_manifest()?;
    let opts = BuildOptions {
        base_dir: config
            .manifest
            .as_ref()
            .and_then(|p| p.parent().map(Path::to_path_buf)),
        cache: config.feature_cache.clone(),
    };
    let stream = build_stream(&manifest, &opts)?;
    let report = validate_stream(&stream);
    if !report.passed {
        let first: Vec<String> = report
            .violations
            .iter()
            .take(5)
            .map(|v| format!("{:?}: {}", v.kind, v.detail))
            .collect();
        return Err(Error::Validation(format!(
            "{} violation(s): {}",
            report.violations.len(),
            first.join("; ")
        )));
    }
    let stream = match config.standardization() {
        Standardize::PerTask => stream.standardized_per_task(),
        Standardize::None => stream,
    };
    Ok((manifest, stream))
}

/// Trains session by session and fills the accuracy matrix: row `t` after
/// session `t`; Joint trains once and fills row `T` only.
pub fn run_on_stream(
    config: &ExperimentConfig,
    stream: &TaskStream,
    config_hash: String,
) -> Result<RunRecord> {
    let tasks = stream.len();
    let spec = ModelSpec::new(
        stream.feature_dim(),
        config.model.hidden_dims.clone(),
        stream.num_classes(),
    )?;
    let seeds = SeedSet::derive(config.seed);
    let mut model = Model::init(spec, seeds.init);
    let train = config.train_config(stream.kind);
    let mut learner = Learner::new(config.strategy.clone(), train, seeds)?;
    let mut matrix = AccuracyMatrix::new(tasks)?;
    let mut curve = Vec::new();
    let mut session_seconds = Vec::new();

    let sessions: Vec<usize> = if config.strategy.kind == StrategyKind::Joint {
        vec![tasks]
    } else {
        (1..=tasks).collect()
    };
    for t in sessions {
        let start = Instant::now();
        learner.train_task(&mut model, stream, t)?;
        session_seconds.push(start.elapsed().as_secs_f64());
        for j in 1..=tasks {
            let test = &stream.task(j)?.test;
            matrix.record(t, j, model.accuracy(&test.features, &test.labels)?)?;
        }
        let accuracy = match stream.kind {
            ScenarioKind::DI => {
                matrix
                    .row(t)?
                    .iter()
                    .map(|v| v.expect("row filled"))
                    .sum::<f64>()
                    / tasks as f64
            }
            ScenarioKind::CI => {
                let pool = stream.seen_test_pool(t)?;
                model.accuracy(&pool.features, &pool.labels)?
            }
        };
        curve.push(CurvePoint {
            session: t,
            accuracy,
        });
    }

    Ok(RunRecord {
        config_hash,
        label: config.strategy.label(tasks),
        strategy: config.strategy.kind,
        scenario: stream.kind,
        seed: config.seed,
        tasks,
        metrics: matrix.summary(),
        matrix,
        curve,
        session_seconds,
        diagnostics: learner.diagnostics().clone(),
    })
}

/// Runs one config end to end and persists it when `output_dir` is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunRecord> {
    let (manifest, stream) = prepare_stream(config)?;
    let record = run_on_stream(config, &stream, config.hash(&manifest))?;
    if let Some(dir) = &config.output_dir {
        persist(&record, config, dir)?;
    }
    Ok(record)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Matrix-derived session curve in the scenario's mode, for reference.
pub fn matrix_curve(record: &RunRecord) -> Vec<(usize, f64)> {
    let mode = match record.scenario {
        ScenarioKind::DI => CurveMode::AllTasks,
        ScenarioKind::CI => CurveMode::SeenTasks,
    };
    record.matrix.partial_curve(mode)
}

/// Writes `<dir>/<hash>/{config.json, R.csv, R.json, metrics.json,
/// curve.csv, diagnostics.json, record.json}` and returns the run directory.
pub fn persist(record: &RunRecord, config: &ExperimentConfig, dir: &Path) -> Result<PathBuf> {
    let run_dir = dir.join(&record.config_hash[..16]);
    std::fs::create_dir_all(&run_dir).map_err(|e| Error::io(&run_dir, e))?;
    let pct = config.percent;
    let scale = if pct { 100.0 } else { 1.0 };
    write(&run_dir.join("config.json"), &config.to_json())?;
    write(&run_dir.join("R.csv"), &matrix_to_csv(&record.matrix, pct))?;
    write(
        &run_dir.join("R.json"),
        &serde_json::to_string_pretty(&MatrixSidecar::of(&record.matrix, pct))?,
    )?;
    let metrics = if pct {
        record.metrics.to_percent()
    } else {
        record.metrics
    };
    let metrics_json = serde_json::json!({
        "label": record.label,
        "mode": if pct { "percent" } else { "fraction" },
        "bwt": metrics.bwt,
        "fwt": metrics.fwt,
        "a": metrics.a,
        "acc": metrics.acc,
    });
    write(
        &run_dir.join("metrics.json"),
        &serde_json::to_string_pretty(&metrics_json)?,
    )?;
    let mut curve = String::from("session,mean_accuracy\n");
    for p in &record.curve {
        curve.push_str(&format!("{},{}\n", p.session, p.accuracy * scale));
    }
    write(&run_dir.join("curve.csv"), &curve)?;
    let diag = serde_json::json!({
        "session_seconds": record.session_seconds,
        "diagnostics": record.diagnostics,
    });
    write(
        &run_dir.join("diagnostics.json"),
        &serde_json::to_string_pretty(&diag)?,
    )?;
    write(
        &run_dir.join("record.json"),
        &serde_json::to_string_pretty(record)?,
    )?;
    Ok(run_dir)
}
