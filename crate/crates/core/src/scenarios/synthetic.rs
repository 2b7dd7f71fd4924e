//! Manifest generators for synthetic streams: the standard desk-scale DI
//! and CI streams, and streams shaped like the DCASE-derived benchmark
//! (same task names, class groups and split sizes, Gaussian features).

use super::manifest::{ClassEntry, ClusterSource, Manifest, ScenarioKind, SplitCounts, TaskEntry};

/// DCASE task-2 development segments, in stream order.
pub const DI_TASK_NAMES: [&str; 6] = [
    "DCASE2021 source",
    "DCASE2021 target",
    "DCASE2022 source",
    "DCASE2022 target",
    "DCASE2023 source",
    "DCASE2023 target",
];
pub const DI_TRAIN_COUNTS: [usize; 6] = [3098, 3036, 1512, 1512, 504, 504];
pub const DI_TEST_COUNTS: [usize; 6] = [862, 844, 420, 420, 140, 140];

/// Machine types per CI task.
pub const CI_GROUPS: [&[&str]; 6] = [
    &["ToyCar", "ToyConveyor"],
    &["Valve", "Fan"],
    &["Pump", "Slider"],
    &["Vacuum", "ToyTank"],
    &["ToyNscale", "ToyDrone"],
    &["Bandsaw", "Grinder", "Shaker"],
];
pub const CI_TRAIN_COUNTS: [usize; 6] = [4320, 4178, 4037, 1425, 1425, 2138];
/// Size of the seen-class test pool after each session.
pub const CI_SEEN_TEST_COUNTS: [usize; 6] = [1200, 2361, 3483, 3879, 4275, 4869];

/// Geometry of the synthetic domain-incremental stream.
///
/// Class means sit at `∓half_gap` on axis 0. Task `t` adds
/// `shift·s_t` on axis 0 (`s_t` alternating +1/−1) and `code` on axis `t`,
/// so the optimal threshold moves between tasks while a shared boundary
/// still exists across all of them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiGeometry {
    pub half_gap: f64,
    pub shift: f64,
    pub code: f64,
    pub sigma: f64,
}

impl Default for DiGeometry {
    fn default() -> Self {
        Self {
            half_gap: 2.5,
            shift: 2.5,
            code: 3.0,
            sigma: 1.0,
        }
    }
}

/// Splits `total` over `k` classes, remainder to the trailing classes.
pub fn split_evenly(total: usize, k: usize) -> Vec<usize> {
    let base = total / k;
    let extra = total % k;
    (0..k).map(|i| base + usize::from(i >= k - extra)).collect()
}

/// DI manifest with labels {normal, abnormal} and per-task shifts.
pub fn di_manifest(
    names: &[&str],
    counts: &[(usize, usize)],
    geometry: DiGeometry,
    seed: u64,
) -> Manifest {
    assert_eq!(names.len(), counts.len());
    let dim = (names.len() + 1).max(8);
    let tasks = names
        .iter()
        .zip(counts)
        .enumerate()
        .map(|(t, (name, &(train, test)))| {
            let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
            let mut delta = vec![0.0; dim];
            delta[0] = geometry.shift * sign;
            delta[1 + t % (dim - 1)] = geometry.code;
            let train_split = split_evenly(train, 2);
            let test_split = split_evenly(test, 2);
            let classes = ["normal", "abnormal"]
                .iter()
                .enumerate()
                .map(|(c, label)| {
                    let mut mean = delta.clone();
                    mean[0] += if c == 0 {
                        -geometry.half_gap
                    } else {
                        geometry.half_gap
                    };
                    ClassEntry {
                        label: (*label).into(),
                        train_glob: None,
                        test_glob: None,
                        cluster: Some(ClusterSource {
                            mean,
                            sigma: geometry.sigma,
                        }),
                        count: SplitCounts {
                            train: train_split[c],
                            test: test_split[c],
                        },
                    }
                })
                .collect();
            TaskEntry {
                name: (*name).into(),
                classes,
            }
        })
        .collect();
    Manifest {
        scenario: ScenarioKind::DI,
        tasks,
        seed,
        features: None,
    }
}

/// Geometry of the synthetic class-incremental stream.
///
/// Class `k` has mean `offset·1 + (separation·sigma/√2)·e_k`, so every pair
/// of classes sits `separation` standard deviations apart. The shared
/// `offset` mimics the common component of embedding features: classes
/// overlap in the directions a classifier head reads, so an unconstrained
/// learner overwrites old classes. Axes beyond the class count are pure
/// noise and set how many samples a classifier needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiGeometry {
    pub dim: usize,
    pub separation: f64,
    pub sigma: f64,
    pub offset: f64,
}

impl Default for CiGeometry {
    fn default() -> Self {
        Self {
            dim: STANDARD_CI_DIM,
            separation: STANDARD_CI_SEPARATION,
            sigma: 1.0,
            offset: STANDARD_CI_OFFSET,
        }
    }
}

/// CI manifest with one mean axis per class.
pub fn ci_manifest(
    groups: &[&[&str]],
    counts: &[Vec<SplitCounts>],
    geometry: CiGeometry,
    seed: u64,
) -> Manifest {
    let CiGeometry {
        dim,
        separation,
        sigma,
        offset,
    } = geometry;
    let total: usize = groups.iter().map(|g| g.len()).sum();
    assert!(dim >= total, "need one axis per class");
    let scale = separation * sigma / std::f64::consts::SQRT_2;
    let mut k = 0;
    let tasks = groups
        .iter()
        .zip(counts)
        .enumerate()
        .map(|(t, (group, cs))| {
            let classes = group
                .iter()
                .zip(cs)
                .map(|(label, &count)| {
                    let mut mean = vec![offset; dim];
                    mean[k] += scale;
                    k += 1;
                    ClassEntry {
                        label: (*label).into(),
                        train_glob: None,
                        test_glob: None,
                        cluster: Some(ClusterSource { mean, sigma }),
                        count,
                    }
                })
                .collect();
            TaskEntry {
                name: format!("T{}", t + 1),
                classes,
            }
        })
        .collect();
    Manifest {
        scenario: ScenarioKind::CI,
        tasks,
        seed,
        features: None,
    }
}

pub const STANDARD_CI_DIM: usize = 256;
pub const STANDARD_CI_SEPARATION: f64 = 10.0;
pub const STANDARD_CI_OFFSET: f64 = 2.0;
pub const STANDARD_CI_TRAIN_PER_CLASS: usize = 100;
pub const STANDARD_CI_TEST_PER_CLASS: usize = 40;
pub const STANDARD_DI_TRAIN_PER_TASK: usize = 200;
pub const STANDARD_DI_TEST_PER_TASK: usize = 80;

/// 6 tasks, 13 classes, 10σ separation, 256 dimensions.
pub fn standard_ci_manifest(seed: u64) -> Manifest {
    let counts: Vec<Vec<SplitCounts>> = CI_GROUPS
        .iter()
        .map(|g| {
            vec![
                SplitCounts {
                    train: STANDARD_CI_TRAIN_PER_CLASS,
                    test: STANDARD_CI_TEST_PER_CLASS,
                };
                g.len()
            ]
        })
        .collect();
    ci_manifest(&CI_GROUPS, &counts, CiGeometry::default(), seed)
}

/// 6 shifted-domain binary tasks.
pub fn standard_di_manifest(seed: u64) -> Manifest {
    let counts = vec![(STANDARD_DI_TRAIN_PER_TASK, STANDARD_DI_TEST_PER_TASK); 6];
    di_manifest(&DI_TASK_NAMES, &counts, DiGeometry::default(), seed)
}

/// DI stream with the DCASE-derived task names and split sizes.
pub fn dcase_di_manifest(seed: u64) -> Manifest {
    let counts: Vec<(usize, usize)> = DI_TRAIN_COUNTS
        .iter()
        .copied()
        .zip(DI_TEST_COUNTS)
        .collect();
    di_manifest(&DI_TASK_NAMES, &counts, DiGeometry::default(), seed)
}

/// CI stream with the DCASE-derived class groups and split sizes; each
/// task's own test split is the growth of the seen-class pool.
pub fn dcase_ci_manifest(seed: u64) -> Manifest {
    let counts: Vec<Vec<SplitCounts>> = CI_GROUPS
        .iter()
        .enumerate()
        .map(|(t, g)| {
            let own_test = CI_SEEN_TEST_COUNTS[t]
                - if t == 0 {
                    0
                } else {
                    CI_SEEN_TEST_COUNTS[t - 1]
                };
            split_evenly(CI_TRAIN_COUNTS[t], g.len())
                .into_iter()
                .zip(split_evenly(own_test, g.len()))
                .map(|(train, test)| SplitCounts { train, test })
                .collect()
        })
        .collect();
    ci_manifest(&CI_GROUPS, &counts, CiGeometry::default(), seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_split() {
        assert_eq!(split_evenly(7, 3), vec![2, 2, 3]);
        assert_eq!(split_evenly(6, 2), vec![3, 3]);
        assert_eq!(split_evenly(4037, 2), vec![2018, 2019]);
    }

    #[test]
    fn ci_means_are_separated() {
        let m = standard_ci_manifest(0);
        let means: Vec<Vec<f64>> = m
            .tasks
            .iter()
            .flat_map(|t| &t.classes)
            .map(|c| c.cluster.as_ref().unwrap().mean.clone())
            .collect();
        assert_eq!(means.len(), 13);
        for i in 0..means.len() {
            for j in i + 1..means.len() {
                let d: f64 = means[i]
                    .iter()
                    .zip(&means[j])
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!((d - 10.0).abs() < 1e-12);
            }
        }
    }
}
