//! Smithian pointing: a fully informed signaler predicts the receiver's
//! actions from the receiver's belief, scores them under its own belief, and
//! chooses between POINT and NO_POINT by how much each would improve that
//! score. Receivers read signals literally (one more sample of the pointed
//! observation) or pragmatically (Bayesian inversion of the signaler).

mod interpret;
mod utility;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pomdp::PomdpError;

pub use interpret::{
    guide_step, literal_interpret, pragmatic_interpret, signaler_distribution, svi, LiteralReceiver,
    PragmaticReceiver, ReceiverInterpretation, SignalDistribution,
};
pub use utility::{smithian_utility_of_action, smithian_utility_of_belief, OutcomeUtility, SignalingContext};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalingError {
    #[error("signal {0} is impossible under every state the receiver considers")]
    IncoherentSignal(Signal),
    #[error("signaler must be certain of the state")]
    UncertainSignaler,
    #[error("rationality parameter must be non-negative, got {0}")]
    InvalidAlpha(f64),
    #[error(transparent)]
    Pomdp(#[from] PomdpError),
}

/// The binary pointing alphabet, active only on stench steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Signal {
    Point,
    NoPoint,
}

impl Signal {
    pub const ALL: [Signal; 2] = [Signal::Point, Signal::NoPoint];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Signal::Point => "POINT",
            Signal::NoPoint => "NO_POINT",
        }
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rationality of the signaler. `alpha = +inf` selects the argmax signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalerConfig {
    pub alpha: f64,
}

impl Default for SignalerConfig {
    fn default() -> Self {
        Self { alpha: 5.0 }
    }
}

impl SignalerConfig {
    pub fn new(alpha: f64) -> Result<Self, SignalingError> {
        if alpha.is_nan() || alpha < 0.0 {
            return Err(SignalingError::InvalidAlpha(alpha));
        }
        Ok(Self { alpha })
    }

    /// Pointing is free.
    pub fn signal_cost(&self, _u: Signal) -> f64 {
        0.0
    }
}
