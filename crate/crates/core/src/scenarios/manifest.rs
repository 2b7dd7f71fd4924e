use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::audiofeat::FeatureConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioKind {
    /// Domain-incremental: fixed label space, shifting inputs.
    DI,
    /// Class-incremental: disjoint new classes per task.
    CI,
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScenarioKind::DI => "DI",
            ScenarioKind::CI => "CI",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub test: usize,
}

/// Gaussian source for one class: N(mean, sigma² I).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSource {
    pub mean: Vec<f64>,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_glob: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_glob: Option<String>,
    /// Used for any split without a glob.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<ClusterSource>,
    pub count: SplitCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskEntry {
    pub name: String,
    pub classes: Vec<ClassEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: ScenarioKind,
    pub tasks: Vec<TaskEntry>,
    #[serde(default)]
    pub seed: u64,
    /// Extraction settings for file sources.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<FeatureConfig>,
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        m.check_shape()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> [u8; 32] {
        let canon = serde_json::to_vec(self).expect("manifest serializes");
        Sha256::digest(&canon).into()
    }

    pub fn check_shape(&self) -> Result<()> {
        if self.tasks.is_empty() {
            return Err(Error::Manifest("manifest declares no tasks".into()));
        }
        for t in &self.tasks {
            if t.classes.is_empty() {
                return Err(Error::Manifest(format!(
                    "task {} declares no classes",
                    t.name
                )));
            }
            for c in &t.classes {
                let needs_cluster = c.train_glob.is_none() || c.test_glob.is_none();
                if needs_cluster && c.cluster.is_none() {
                    return Err(Error::Manifest(format!(
                        "task {} class {}: each split needs a glob or a cluster",
                        t.name, c.label
                    )));
                }
                if let Some(cl) = &c.cluster {
                    if !(cl.sigma > 0.0) || cl.mean.is_empty() {
                        return Err(Error::Manifest(format!(
                            "task {} class {}: cluster needs a mean and sigma > 0",
                            t.name, c.label
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn uses_files(&self) -> bool {
        self.tasks
            .iter()
            .flat_map(|t| &t.classes)
            .any(|c| c.train_glob.is_some() || c.test_glob.is_some())
    }
}
