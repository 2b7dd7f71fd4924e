use serde::{Deserialize, Serialize};

use super::AccuracyMatrix;
use crate::error::{Error, Result};

/// JSON companion of `R.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSidecar {
    pub tasks: usize,
    /// "fraction" or "percent"
    pub mode: String,
    pub fill_mask: Vec<Vec<bool>>,
}

impl MatrixSidecar {
    pub fn of(m: &AccuracyMatrix, percent: bool) -> Self {
        Self {
            tasks: m.tasks(),
            mode: if percent { "percent" } else { "fraction" }.into(),
            fill_mask: m.fill_mask(),
        }
    }
}

/// One line per session, one column per test task, empty for unfilled.
pub fn matrix_to_csv(m: &AccuracyMatrix, percent: bool) -> String {
    let n = m.tasks();
    let mut out = String::from("session");
    for j in 1..=n {
        out.push_str(&format!(",task{j}"));
    }
    out.push('\n');
    for t in 1..=n {
        out.push_str(&t.to_string());
        for j in 1..=n {
            out.push(',');
            if let Ok(Some(v)) = m.get(t, j) {
                let v = if percent { v * 100.0 } else { v };
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str, percent: bool) -> Result<AccuracyMatrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Matrix("empty matrix csv".into()))?;
    let n = header.split(',').count() - 1;
    let mut m = AccuracyMatrix::new(n)?;
    for (t, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n + 1 {
            return Err(Error::Matrix(format!(
                "row {} has {} fields",
                t + 1,
                fields.len()
            )));
        }
        for (j, f) in fields[1..].iter().enumerate() {
            if f.is_empty() {
                continue;
            }
            let v: f64 = f
                .parse()
                .map_err(|e| Error::Matrix(format!("cell ({}, {}): {e}", t + 1, j + 1)))?;
            m.record(t + 1, j + 1, if percent { v / 100.0 } else { v })?;
        }
    }
    Ok(m)
}
