//! The ten training regimes over a shared session lifecycle, with their
//! penalties, distillation loss, memory buffers and gradient projections.

mod config;
mod ewc;
mod learner;
mod lwf;
mod memory;
mod projection;
mod si;
mod snapshot;

pub use config::{StrategyConfig, StrategyKind, TrainConfig};
pub use ewc::{estimate_fisher, ewc_penalty, EwcAnchor, EwcState};
pub use learner::{
    split_seed, Diagnostics, Learner, SeedSet, SessionData, SessionReport, StrategyState,
};
pub use lwf::{lwf_kd_logit_grad, lwf_kd_loss, TeacherSnapshot};
pub use memory::{entries_of, MemoryBuffer, MemoryEntry, MemoryPolicy};
pub use projection::{agem_project, gem_project, AgemOutcome, GemOutcome, GemSolver};
pub use si::{si_consolidate, si_penalty, si_update, SiState};
