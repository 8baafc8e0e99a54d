//! Reproducible batches of guided Wumpus episodes over a grid of hunter
//! conditions and moving costs.

mod plan;
mod runner;
mod seeds;

pub use plan::*;
pub use runner::*;
pub use seeds::*;

use thiserror::Error;

use crate::wumpus::{HunterModel, WumpusError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("unknown plan key '{key}'; valid keys: {valid}")]
    UnknownKey { key: String, valid: String },
    #[error("solving the game at moving cost {cost} failed: {source}")]
    Solve { cost: f64, source: WumpusError },
    #[error("trial failed (condition {condition}, cost {cost}, trial {trial}, seed {seed}): {source}")]
    Trial { condition: HunterModel, cost: f64, trial: usize, seed: u64, source: WumpusError },
    #[error("no policy cached for moving cost {0}")]
    MissingPolicy(f64),
}
