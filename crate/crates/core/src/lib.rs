//! Continual-learning benchmark framework: task streams, ten training
//! regimes, train-test accuracy matrices and transfer metrics.

pub mod audiofeat;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod ndcore;
pub mod scenarios;
pub mod strategies;

pub use error::{Error, Result};
