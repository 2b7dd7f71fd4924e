use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenarios::ScenarioKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyKind {
    Naive,
    Cumulative,
    Joint,
    EWC,
    LwF,
    SI,
    Replay,
    GDumb,
    GEM,
    AGEM,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 10] = [
        StrategyKind::Naive,
        StrategyKind::Cumulative,
        StrategyKind::Joint,
        StrategyKind::EWC,
        StrategyKind::LwF,
        StrategyKind::SI,
        StrategyKind::Replay,
        StrategyKind::GDumb,
        StrategyKind::GEM,
        StrategyKind::AGEM,
    ];

    /// Strategies that store or constrain with past data.
    pub fn is_continual(self) -> bool {
        !matches!(
            self,
            StrategyKind::Naive | StrategyKind::Cumulative | StrategyKind::Joint
        )
    }

    /// Allowed to read train data of tasks other than the current one.
    pub fn reads_all_tasks(self) -> bool {
        matches!(self, StrategyKind::Cumulative | StrategyKind::Joint)
    }

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Naive => "Naive",
            StrategyKind::Cumulative => "Cumulative",
            StrategyKind::Joint => "Joint",
            StrategyKind::EWC => "EWC",
            StrategyKind::LwF => "LwF",
            StrategyKind::SI => "SI",
            StrategyKind::Replay => "Replay",
            StrategyKind::GDumb => "GDumb",
            StrategyKind::GEM => "GEM",
            StrategyKind::AGEM => "A-GEM",
        }
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Strategy choice plus every hyperparameter any strategy reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    /// EWC / SI penalty strength.
    pub lambda: f64,
    /// LwF distillation weight.
    pub alpha: f64,
    /// LwF softmax temperature.
    pub temperature: f64,
    /// Replay / GDumb buffer capacity.
    pub memory_size: usize,
    /// GEM / A-GEM samples kept per finished task.
    pub per_task_memory: usize,
    /// Samples used for each Fisher estimate.
    pub fisher_budget: usize,
    /// SI damping ξ.
    pub si_damping: f64,
    /// GEM lower bound on the dual variables.
    pub gem_margin: f64,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            kind: StrategyKind::Naive,
            lambda: 1.0,
            alpha: 1.0,
            temperature: 2.0,
            memory_size: 2000,
            per_task_memory: 200,
            fisher_budget: 512,
            si_damping: 0.1,
            gem_margin: 0.0,
        }
    }
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind) -> Self {
        Self {
            kind,
            ..Default::default()
        }
    }

    /// Hyperparameters used for the DCASE benchmark runs of each scenario.
    pub fn benchmark_default(kind: StrategyKind, scenario: ScenarioKind) -> Self {
        let mut c = Self::new(kind);
        match (kind, scenario) {
            (StrategyKind::EWC, ScenarioKind::DI) => c.lambda = 0.5,
            (StrategyKind::EWC, ScenarioKind::CI) => c.lambda = 2.0,
            (StrategyKind::SI, ScenarioKind::DI) => c.lambda = 0.8,
            (StrategyKind::SI, ScenarioKind::CI) => c.lambda = 2.0,
            (StrategyKind::LwF, _) => {
                c.alpha = 2.0;
                c.temperature = 2.0;
            }
            _ => {}
        }
        c
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_temperature(mut self, t: f64) -> Self {
        self.temperature = t;
        self
    }

    pub fn with_memory(mut self, size: usize) -> Self {
        self.memory_size = size;
        self
    }

    pub fn with_per_task_memory(mut self, size: usize) -> Self {
        self.per_task_memory = size;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("{}: {what}", self.kind)));
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad("lambda must be a finite value >= 0");
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return bad("alpha must be a finite value >= 0");
        }
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return bad("temperature must be > 0");
        }
        if !(self.si_damping > 0.0) {
            return bad("SI damping must be > 0");
        }
        if !(self.gem_margin >= 0.0) {
            return bad("GEM margin must be >= 0");
        }
        if self.kind == StrategyKind::EWC && self.fisher_budget == 0 {
            return bad("fisher budget must be >= 1");
        }
        Ok(())
    }

    /// Row label for reports, e.g. `EWC (lambda=2)` or `GEM (mem=200*6)`.
    pub fn label(&self, tasks: usize) -> String {
        let k = self.kind.name();
        match self.kind {
            StrategyKind::EWC | StrategyKind::SI => format!("{k} (lambda={})", self.lambda),
            StrategyKind::LwF => format!("{k} (alpha={}, T={})", self.alpha, self.temperature),
            StrategyKind::Replay | StrategyKind::GDumb => format!("{k} (mem={})", self.memory_size),
            StrategyKind::GEM | StrategyKind::AGEM => {
                format!("{k} (mem={}*{tasks})", self.per_task_memory)
            }
            _ => k.to_string(),
        }
    }
}

/// Optimisation settings shared by every strategy in a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config("learning rate must be > 0".into()));
        }
        Ok(())
    }

    /// Batch 8, lr 1e-3, 50 epochs.
    pub fn di_default() -> Self {
        Self {
            epochs: 50,
            batch_size: 8,
            learning_rate: 1e-3,
        }
    }

    /// Batch 8, lr 1e-4, 30 epochs.
    pub fn ci_default() -> Self {
        Self {
            epochs: 30,
            batch_size: 8,
            learning_rate: 1e-4,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(
            StrategyConfig::new(StrategyKind::EWC)
                .with_lambda(2.0)
                .label(6),
            "EWC (lambda=2)"
        );
        assert_eq!(
            StrategyConfig::new(StrategyKind::GEM).label(6),
            "GEM (mem=200*6)"
        );
        assert_eq!(
            StrategyConfig::new(StrategyKind::AGEM)
                .with_per_task_memory(10)
                .label(6),
            "A-GEM (mem=10*6)"
        );
        assert_eq!(
            StrategyConfig::new(StrategyKind::LwF)
                .with_alpha(2.0)
                .label(6),
            "LwF (alpha=2, T=2)"
        );
        assert_eq!(StrategyConfig::new(StrategyKind::Joint).label(6), "Joint");
    }

    #[test]
    fn validation() {
        assert!(StrategyConfig::new(StrategyKind::EWC)
            .with_lambda(-1.0)
            .validate()
            .is_err());
        assert!(StrategyConfig::new(StrategyKind::LwF)
            .with_temperature(0.0)
            .validate()
            .is_err());
        assert!(StrategyConfig::new(StrategyKind::Replay)
            .with_memory(0)
            .validate()
            .is_ok());
        let bad = TrainConfig {
            epochs: 0,
            batch_size: 8,
            learning_rate: 1e-3,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn benchmark_defaults() {
        assert_eq!(
            StrategyConfig::benchmark_default(StrategyKind::EWC, ScenarioKind::DI).lambda,
            0.5
        );
        assert_eq!(
            StrategyConfig::benchmark_default(StrategyKind::EWC, ScenarioKind::CI).lambda,
            2.0
        );
        assert_eq!(
            StrategyConfig::benchmark_default(StrategyKind::SI, ScenarioKind::DI).lambda,
            0.8
        );
        let lwf = StrategyConfig::benchmark_default(StrategyKind::LwF, ScenarioKind::CI);
        assert_eq!((lwf.alpha, lwf.temperature), (2.0, 2.0));
        assert_eq!(StrategyConfig::new(StrategyKind::Replay).memory_size, 2000);
    }
}
