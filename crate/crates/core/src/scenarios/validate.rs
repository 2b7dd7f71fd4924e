use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::manifest::ScenarioKind;
use super::stream::TaskStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    EmptySplit,
    LabelOutsideSet,
    LabelSetMismatch,
    OverlappingLabels,
    Leakage,
    CrossTaskDuplicate,
    CountMismatch,
    UnbalancedTest,
    FeatureDim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub task: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub scenario: ScenarioKind,
    pub tasks: usize,
    pub classes: usize,
    pub train_counts: Vec<usize>,
    pub test_counts: Vec<usize>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Checks scenario invariants, declared counts and train/test leakage.
/// Never fails; problems are listed in the report.
pub fn validate_stream(stream: &TaskStream) -> ValidationReport {
    let mut v = Vec::new();
    let mut push =
        |kind, task: Option<usize>, detail: String| v.push(Violation { kind, task, detail });
    let dim = stream.feature_dim();

    for t in &stream.tasks {
        if t.train.is_empty() || t.test.is_empty() {
            push(
                ViolationKind::EmptySplit,
                Some(t.id),
                format!("train {} / test {}", t.train.len(), t.test.len()),
            );
        }
        if t.train.dim() != dim || t.test.dim() != dim {
            push(
                ViolationKind::FeatureDim,
                Some(t.id),
                format!("expected feature dim {dim}"),
            );
        }
        for (split, set) in [("train", &t.train), ("test", &t.test)] {
            if let Some(y) = set.labels.iter().find(|y| !t.label_set.contains(y)) {
                push(
                    ViolationKind::LabelOutsideSet,
                    Some(t.id),
                    format!("{split} label {y} not in task label set"),
                );
            }
        }
        if t.train.len() != t.declared.train || t.test.len() != t.declared.test {
            push(
                ViolationKind::CountMismatch,
                Some(t.id),
                format!(
                    "declared {}/{} train/test, found {}/{}",
                    t.declared.train,
                    t.declared.test,
                    t.train.len(),
                    t.test.len()
                ),
            );
        }
        let train_ids: BTreeSet<u64> = t.train.ids.iter().copied().collect();
        let leaked = t
            .test
            .ids
            .iter()
            .filter(|id| train_ids.contains(id))
            .count();
        if leaked > 0 {
            push(
                ViolationKind::Leakage,
                Some(t.id),
                format!("{leaked} test samples also in train"),
            );
        }
    }

    match stream.kind {
        ScenarioKind::DI => {
            if let Some(first) = stream.tasks.first() {
                for t in &stream.tasks[1..] {
                    if t.label_set != first.label_set {
                        push(
                            ViolationKind::LabelSetMismatch,
                            Some(t.id),
                            "label set differs from task 1".into(),
                        );
                    }
                }
            }
            for t in &stream.tasks {
                let counts = t.test.class_counts();
                let balanced = t
                    .label_set
                    .iter()
                    .all(|c| counts.get(c) == counts.get(t.label_set.iter().next().unwrap()));
                if !balanced {
                    push(
                        ViolationKind::UnbalancedTest,
                        Some(t.id),
                        format!("test class counts {counts:?}"),
                    );
                }
            }
        }
        ScenarioKind::CI => {
            let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
            for t in &stream.tasks {
                for &c in &t.label_set {
                    if let Some(prev) = owner.insert(c, t.id) {
                        push(
                            ViolationKind::OverlappingLabels,
                            Some(t.id),
                            format!(
                                "class {} also in task {prev}",
                                stream.class_names.get(c).cloned().unwrap_or_default()
                            ),
                        );
                    }
                }
            }
            let mut id_owner: BTreeMap<u64, usize> = BTreeMap::new();
            for t in &stream.tasks {
                let mut dup = 0;
                for id in t.train.ids.iter().chain(&t.test.ids) {
                    if let Some(&prev) = id_owner.get(id) {
                        if prev != t.id {
                            dup += 1;
                        }
                    } else {
                        id_owner.insert(*id, t.id);
                    }
                }
                if dup > 0 {
                    push(
                        ViolationKind::CrossTaskDuplicate,
                        Some(t.id),
                        format!("{dup} samples also in an earlier task"),
                    );
                }
            }
        }
    }

    ValidationReport {
        passed: v.is_empty(),
        scenario: stream.kind,
        tasks: stream.len(),
        classes: stream.num_classes(),
        train_counts: stream.tasks.iter().map(|t| t.train.len()).collect(),
        test_counts: stream.tasks.iter().map(|t| t.test.len()).collect(),
        violations: v,
    }
}
