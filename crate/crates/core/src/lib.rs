//! Coalition Proposal learning dynamics for transferable-utility games.
//!
//! Players hold aspirations on a δ-grid and repeatedly propose coalitions.
//! A proposal succeeds when the coalition can meet everyone's aspiration plus
//! one step for the proposer. When the game has a core, the process reaches a
//! core allocation together with a welfare-maximising structure.
//!
//! Modules:
//! - [`game`]: games, allocations, structures, feasibility and classification
//! - [`dynamics`]: the proposal process, including message drops
//! - [`oracle`]: exact core witnesses, maximal welfare, steering sequences
//! - [`baselines`]: best-reply comparison dynamics
//! - [`task_alloc`]: the multi-agent task-allocation game
//! - [`harness`]: experiment runs, sweeps and reports

pub mod baselines;
pub mod coalition;
pub mod dynamics;
pub mod error;
pub mod game;
pub mod grid;
pub mod harness;
pub mod oracle;
pub mod rng;
pub mod task_alloc;

#[doc(hidden)]
pub mod fixtures;

pub use coalition::{Coalition, Player};
pub use error::{Error, Result};
pub use game::{Allocation, CoalitionStructure, EnvironmentState, PlayerPartition, StateClass, TUGame};
pub use grid::{Delta, GridValue};
