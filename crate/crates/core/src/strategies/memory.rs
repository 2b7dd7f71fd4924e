use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scenarios::LabeledSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryPolicy {
    Reservoir,
    ClassBalancedGreedy,
    PerTaskRing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryEntry {
    pub features: Vec<f64>,
    pub label: usize,
    pub origin_task: usize,
    pub id: u64,
}

/// Bounded sample store; `entries.len() <= capacity` always.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryBuffer {
    pub capacity: usize,
    pub policy: MemoryPolicy,
    pub entries: Vec<MemoryEntry>,
    /// Samples offered so far.
    pub seen: u64,
    /// Ring write position.
    cursor: usize,
}

impl MemoryBuffer {
    pub fn new(capacity: usize, policy: MemoryPolicy) -> Self {
        Self {
            capacity,
            policy,
            entries: Vec::new(),
            seen: 0,
            cursor: 0,
        }
    }

    pub(crate) fn restored(
        capacity: usize,
        policy: MemoryPolicy,
        entries: Vec<MemoryEntry>,
        seen: u64,
        cursor: usize,
    ) -> Self {
        Self {
            capacity,
            policy,
            entries,
            seen,
            cursor,
        }
    }

    pub(crate) fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn class_counts(&self) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for e in &self.entries {
            *m.entry(e.label).or_insert(0) += 1;
        }
        m
    }

    /// Algorithm R: the `n`-th offered sample replaces a uniform slot with
    /// probability `capacity / n`.
    pub fn reservoir_insert<R: Rng + ?Sized>(&mut self, sample: MemoryEntry, rng: &mut R) {
        self.seen += 1;
        if self.capacity == 0 {
            return;
        }
        if self.entries.len() < self.capacity {
            self.entries.push(sample);
            return;
        }
        let j = rng.random_range(0..self.seen);
        if (j as usize) < self.capacity {
            self.entries[j as usize] = sample;
        }
    }

    /// Greedy class-balanced insert. A full buffer accepts a sample only if
    /// its class holds fewer entries than the largest class, evicting the
    /// oldest entry of the largest class (lowest class id on ties).
    pub fn gdumb_insert_balanced(&mut self, sample: MemoryEntry) -> bool {
        self.seen += 1;
        if self.capacity == 0 {
            return false;
        }
        if self.entries.len() < self.capacity {
            self.entries.push(sample);
            return true;
        }
        let counts = self.class_counts();
        let (&largest, &max) = counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .expect("full buffer has entries");
        let own = counts.get(&sample.label).copied().unwrap_or(0);
        if own >= max {
            return false;
        }
        let victim = self
            .entries
            .iter()
            .position(|e| e.label == largest)
            .expect("largest class present");
        self.entries.remove(victim);
        self.entries.push(sample);
        true
    }

    /// Keeps the last `capacity` samples offered.
    pub fn ring_insert(&mut self, sample: MemoryEntry) {
        self.seen += 1;
        if self.capacity == 0 {
            return;
        }
        if self.entries.len() < self.capacity {
            self.entries.push(sample);
        } else {
            self.entries[self.cursor] = sample;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Inserts according to the buffer's policy.
    pub fn insert<R: Rng + ?Sized>(&mut self, sample: MemoryEntry, rng: &mut R) {
        match self.policy {
            MemoryPolicy::Reservoir => self.reservoir_insert(sample, rng),
            MemoryPolicy::ClassBalancedGreedy => {
                self.gdumb_insert_balanced(sample);
            }
            MemoryPolicy::PerTaskRing => self.ring_insert(sample),
        }
    }

    pub fn to_labeled_set(&self, dim: usize) -> Result<LabeledSet> {
        let mut s = LabeledSet::empty(dim);
        for e in &self.entries {
            s.push(&e.features, e.label, e.id)?;
        }
        Ok(s)
    }
}

/// Every row of `set` as a memory entry tagged with `task`.
pub fn entries_of(set: &LabeledSet, task: usize) -> impl Iterator<Item = MemoryEntry> + '_ {
    (0..set.len()).map(move |i| MemoryEntry {
        features: set.features.row(i).to_vec(),
        label: set.labels[i],
        origin_task: task,
        id: set.ids[i],
    })
}
