//! Fixed-effects ANOVA, Bonferroni post-hoc contrasts and percentile
//! bootstrap intervals, plus the experiment summary built from them.

mod anova;
mod bootstrap;
mod fdist;
mod posthoc;
mod report;

pub use anova::*;
pub use bootstrap::*;
pub use fdist::*;
pub use posthoc::*;
pub use report::*;

use thiserror::Error;

use crate::wumpus::WumpusError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("no observations to analyse")]
    Empty,
    #[error("unbalanced design: {0}")]
    Unbalanced(String),
    #[error("invalid statistics setting: {0}")]
    InvalidSetting(String),
    #[error(transparent)]
    Wumpus(#[from] WumpusError),
    #[error("report serialization: {0}")]
    Serde(String),
}

/// Serializes finite floats as JSON numbers and non-finite ones as the
/// strings `"inf"`, `"-inf"` and `"nan"`, so reports survive a JSON round trip.
pub mod json_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("invalid float '{other}'"))),
            },
        }
    }
}
