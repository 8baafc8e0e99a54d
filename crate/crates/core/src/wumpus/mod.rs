//! The guided Wumpus hunting game and its episode engine.

mod episode;
mod game;
mod record;

use thiserror::Error;

use crate::pomdp::PomdpError;
use crate::signaling::SignalingError;

pub use episode::*;
pub use game::*;
pub use record::*;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WumpusError {
    #[error("invalid game configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid trial record: {0}")]
    InvalidRecord(String),
    #[error(transparent)]
    Pomdp(#[from] PomdpError),
    #[error(transparent)]
    Signaling(#[from] SignalingError),
}
