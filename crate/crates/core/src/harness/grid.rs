use rayon::prelude::*;

use super::config::{ExperimentConfig, GridConfig};
use super::run::{run_experiment, RunRecord};
use crate::error::{Error, Result};

/// One grid cell: its config and either a record or the error it hit.
#[derive(Debug)]
pub struct GridCell {
    pub config: ExperimentConfig,
    pub outcome: Result<RunRecord>,
}

/// Runs every cell of the grid. Cell failures are kept per cell; only an
/// invalid grid definition fails the whole call.
pub fn run_grid(grid: &GridConfig, parallel: bool) -> Result<Vec<GridCell>> {
    let cells = grid.expand()?;
    let run = |config: ExperimentConfig| GridCell {
        outcome: run_experiment(&config),
        config,
    };
    if !parallel {
        return Ok(cells.into_iter().map(run).collect());
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = grid.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(|| cells.into_par_iter().map(run).collect()))
}
