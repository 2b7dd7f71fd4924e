use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::run::RunRecord;
use crate::error::{Error, Result};
use crate::scenarios::ScenarioKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Text,
}

/// One table row: an approach label and its metrics (`None` prints `--`).
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub approach: String,
    pub values: [Option<f64>; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub scenario: ScenarioKind,
    pub percent: bool,
    pub rows: Vec<ReportRow>,
    /// (approach, session, accuracy).
    pub curves: Vec<(String, usize, f64)>,
}

/// Every `record.json` under `dir`, sorted by path.
pub fn load_records(dir: &Path) -> Result<Vec<RunRecord>> {
    let mut paths: Vec<PathBuf> = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let entries = std::fs::read_dir(&d).map_err(|e| Error::io(&d, e))?;
        for e in entries {
            let p = e.map_err(|e| Error::io(&d, e))?.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().is_some_and(|n| n == "record.json") {
                paths.push(p);
            }
        }
    }
    paths.sort();
    paths.iter().map(|p| RunRecord::load(p)).collect()
}

fn mean(values: &[Option<f64>]) -> Option<f64> {
    let v: Option<Vec<f64>> = values.iter().copied().collect();
    v.filter(|v| !v.is_empty())
        .map(|v| v.iter().sum::<f64>() / v.len() as f64)
}

/// Per-approach rows. Approaches run with several seeds get one row per
/// seed plus a `[mean]` row.
pub fn build_report(records: &[RunRecord], percent: bool) -> Result<Report> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidArgument("no run records to report".into()))?;
    if let Some(r) = records.iter().find(|r| r.scenario != first.scenario) {
        return Err(Error::InvalidArgument(format!(
            "records mix scenarios {} and {}",
            first.scenario, r.scenario
        )));
    }
    let scale = if percent { 100.0 } else { 1.0 };
    let mut groups: BTreeMap<(crate::strategies::StrategyKind, String), Vec<&RunRecord>> =
        BTreeMap::new();
    for r in records {
        groups
            .entry((r.strategy, r.label.clone()))
            .or_default()
            .push(r);
    }
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for ((_, label), mut group) in groups {
        group.sort_by_key(|r| r.seed);
        let scaled = |r: &RunRecord| r.metrics.values().map(|v| v.map(|x| x * scale));
        if group.len() == 1 {
            rows.push(ReportRow {
                approach: label.clone(),
                values: scaled(group[0]),
            });
        } else {
            for r in &group {
                rows.push(ReportRow {
                    approach: format!("{label} [seed {}]", r.seed),
                    values: scaled(r),
                });
            }
            let cols: Vec<[Option<f64>; 4]> = group.iter().map(|r| scaled(r)).collect();
            let values = [0, 1, 2, 3].map(|k| mean(&cols.iter().map(|c| c[k]).collect::<Vec<_>>()));
            rows.push(ReportRow {
                approach: format!("{label} [mean]"),
                values,
            });
        }
        // curves average over seeds, session by session
        let mut by_session: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for r in &group {
            for p in &r.curve {
                by_session
                    .entry(p.session)
                    .or_default()
                    .push(p.accuracy * scale);
            }
        }
        for (s, v) in by_session {
            curves.push((label.clone(), s, v.iter().sum::<f64>() / v.len() as f64));
        }
    }
    Ok(Report {
        scenario: first.scenario,
        percent,
        rows,
        curves,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cell(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "--".to_string(), |x| format!("{x:.decimals$}"))
}

impl Report {
    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Text => self.to_text(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("approach,bwt,fwt,a,acc\n");
        for r in &self.rows {
            let vals: Vec<String> = r.values.iter().map(|&v| cell(v, 4)).collect();
            out.push_str(&format!("{},{}\n", csv_field(&r.approach), vals.join(",")));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let header = ["Approach", "BWT", "FWT", "A", "ACC"];
        let body: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.approach.clone(),
                    cell(r.values[0], 2),
                    cell(r.values[1], 2),
                    cell(r.values[2], 2),
                    cell(r.values[3], 2),
                ]
            })
            .collect();
        let mut width = header.map(str::len);
        for row in &body {
            for (w, c) in width.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: [&str; 5]| {
            let mut s = format!("{:<w$}", cells[0], w = width[0]);
            for k in 1..5 {
                s.push_str(&format!("  {:>w$}", cells[k], w = width[k]));
            }
            s.push('\n');
            s
        };
        let unit = if self.percent { "%" } else { "fraction" };
        let mut out = format!("{} scenario ({unit})\n", self.scenario);
        out.push_str(&line(header));
        out.push_str(&format!(
            "{}\n",
            "-".repeat(width.iter().sum::<usize>() + 8)
        ));
        for row in &body {
            out.push_str(&line([&row[0], &row[1], &row[2], &row[3], &row[4]]));
        }
        out
    }

    pub fn curves_csv(&self) -> String {
        let mut out = String::from("approach,session,mean_accuracy\n");
        for (a, s, v) in &self.curves {
            out.push_str(&format!("{},{s},{v}\n", csv_field(a)));
        }
        out
    }
}
