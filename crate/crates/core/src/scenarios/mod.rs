//! Task streams for the domain-incremental and class-incremental
//! scenarios, built from JSON manifests.

mod manifest;
mod stream;
pub mod synthetic;
mod validate;

pub use manifest::{ClassEntry, ClusterSource, Manifest, ScenarioKind, SplitCounts, TaskEntry};
pub use stream::{
    build_ci_stream, build_di_stream, build_stream, build_unchecked, extract_manifest_features,
    feature_config, BuildOptions, LabeledSet, Task, TaskStream,
};
pub use validate::{validate_stream, ValidationReport, Violation, ViolationKind};

use std::collections::BTreeSet;

use crate::error::Result;

/// Union of the label sets of tasks `1..=t`.
pub fn seen_classes(stream: &TaskStream, t: usize) -> Result<BTreeSet<usize>> {
    stream.seen_classes(t)
}
