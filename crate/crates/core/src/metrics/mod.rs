//! Train-test accuracy matrix and the transfer metrics computed from it.
//!
//! `R[t][j]` is the accuracy on task `j`'s test split after training
//! session `t`. Indices are 1-based at the API, matching session numbers.
//! Values are stored as fractions; percent output is a ×100 view.

mod io;

pub use io::{matrix_from_csv, matrix_to_csv, MatrixSidecar};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyMatrix {
    tasks: usize,
    cells: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveMode {
    /// Mean over every task's test set after each session.
    AllTasks,
    /// Mean over the tasks seen so far.
    SeenTasks,
}

impl AccuracyMatrix {
    pub fn new(tasks: usize) -> Result<Self> {
        if tasks == 0 {
            return Err(Error::Matrix("matrix needs at least one task".into()));
        }
        Ok(Self {
            tasks,
            cells: vec![None; tasks * tasks],
        })
    }

    /// Builds a fully filled matrix from fraction-valued rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let mut m = Self::new(rows.len())?;
        for (t, row) in rows.iter().enumerate() {
            if row.len() != rows.len() {
                return Err(Error::Matrix(format!(
                    "row {} has {} entries",
                    t + 1,
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                m.record(t + 1, j + 1, v)?;
            }
        }
        Ok(m)
    }

    pub fn tasks(&self) -> usize {
        self.tasks
    }

    fn index(&self, t: usize, j: usize) -> Result<usize> {
        if t == 0 || j == 0 || t > self.tasks || j > self.tasks {
            return Err(Error::Matrix(format!(
                "cell ({t}, {j}) outside a {n}x{n} matrix",
                n = self.tasks
            )));
        }
        Ok((t - 1) * self.tasks + (j - 1))
    }

    /// Sets `R[t][j]`. Cells are write-once.
    pub fn record(&mut self, t: usize, j: usize, accuracy: f64) -> Result<()> {
        let i = self.index(t, j)?;
        if !(0.0..=1.0).contains(&accuracy) {
            return Err(Error::Matrix(format!("accuracy {accuracy} outside [0, 1]")));
        }
        if self.cells[i].is_some() {
            return Err(Error::Matrix(format!("cell ({t}, {j}) already recorded")));
        }
        self.cells[i] = Some(accuracy);
        Ok(())
    }

    pub fn get(&self, t: usize, j: usize) -> Result<Option<f64>> {
        Ok(self.cells[self.index(t, j)?])
    }

    fn req(&self, t: usize, j: usize) -> Result<f64> {
        self.get(t, j)?
            .ok_or_else(|| Error::Matrix(format!("cell ({t}, {j}) is not filled")))
    }

    pub fn is_filled(&self, t: usize, j: usize) -> bool {
        matches!(self.get(t, j), Ok(Some(_)))
    }

    pub fn fill_mask(&self) -> Vec<Vec<bool>> {
        (1..=self.tasks)
            .map(|t| (1..=self.tasks).map(|j| self.is_filled(t, j)).collect())
            .collect()
    }

    pub fn filled_rows(&self) -> Vec<usize> {
        (1..=self.tasks)
            .filter(|&t| (1..=self.tasks).all(|j| self.is_filled(t, j)))
            .collect()
    }

    pub fn row(&self, t: usize) -> Result<Vec<Option<f64>>> {
        (1..=self.tasks).map(|j| self.get(t, j)).collect()
    }

    fn need_pairs(&self) -> Result<usize> {
        if self.tasks < 2 {
            return Err(Error::Matrix(
                "transfer metrics need at least two tasks".into(),
            ));
        }
        Ok(self.tasks)
    }

    /// Backward transfer: mean change on earlier tasks relative to the
    /// accuracy measured right after each was learned.
    pub fn bwt(&self) -> Result<f64> {
        let n = self.need_pairs()?;
        let mut sum = 0.0;
        for i in 2..=n {
            for j in 1..i {
                sum += self.req(i, j)? - self.req(j, j)?;
            }
        }
        Ok(2.0 * sum / (n * (n - 1)) as f64)
    }

    /// Forward transfer: mean accuracy on tasks not trained yet
    /// (strict upper triangle), without baseline subtraction.
    pub fn fwt(&self) -> Result<f64> {
        let n = self.need_pairs()?;
        let mut sum = 0.0;
        for t in 1..n {
            for j in t + 1..=n {
                sum += self.req(t, j)?;
            }
        }
        Ok(2.0 * sum / (n * (n - 1)) as f64)
    }

    /// Mean of the final row.
    pub fn acc_final(&self) -> Result<f64> {
        let n = self.tasks;
        let mut sum = 0.0;
        for j in 1..=n {
            sum += self.req(n, j)?;
        }
        Ok(sum / n as f64)
    }

    /// Mean over the lower triangle including the diagonal.
    pub fn a_incremental(&self) -> Result<f64> {
        let n = self.tasks;
        let mut sum = 0.0;
        for i in 1..=n {
            for j in 1..=i {
                sum += self.req(i, j)?;
            }
        }
        Ok(2.0 * sum / (n * (n + 1)) as f64)
    }

    pub fn session_curve(&self, mode: CurveMode) -> Result<Vec<f64>> {
        let n = self.tasks;
        (1..=n)
            .map(|t| {
                let upto = match mode {
                    CurveMode::AllTasks => n,
                    CurveMode::SeenTasks => t,
                };
                let mut sum = 0.0;
                for j in 1..=upto {
                    sum += self.req(t, j)?;
                }
                Ok(sum / upto as f64)
            })
            .collect()
    }

    /// Curve entries for the rows that can be evaluated, as (session, value).
    pub fn partial_curve(&self, mode: CurveMode) -> Vec<(usize, f64)> {
        let n = self.tasks;
        (1..=n)
            .filter_map(|t| {
                let upto = match mode {
                    CurveMode::AllTasks => n,
                    CurveMode::SeenTasks => t,
                };
                let vals: Option<Vec<f64>> =
                    (1..=upto).map(|j| self.get(t, j).ok().flatten()).collect();
                vals.map(|v| (t, v.iter().sum::<f64>() / upto as f64))
            })
            .collect()
    }

    pub fn summary(&self) -> MetricSummary {
        MetricSummary {
            bwt: self.bwt().ok(),
            fwt: self.fwt().ok(),
            a: self.a_incremental().ok(),
            acc: self.acc_final().ok(),
        }
    }
}

/// The four headline numbers; `None` where the matrix lacks the cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub bwt: Option<f64>,
    pub fwt: Option<f64>,
    pub a: Option<f64>,
    pub acc: Option<f64>,
}

impl MetricSummary {
    pub fn to_percent(self) -> Self {
        let p = |v: Option<f64>| v.map(|x| x * 100.0);
        Self {
            bwt: p(self.bwt),
            fwt: p(self.fwt),
            a: p(self.a),
            acc: p(self.acc),
        }
    }

    pub fn values(&self) -> [Option<f64>; 4] {
        [self.bwt, self.fwt, self.a, self.acc]
    }
}
