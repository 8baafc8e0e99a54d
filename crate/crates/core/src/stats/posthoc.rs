use serde::{Deserialize, Serialize};

use super::anova::{mean, one_way_anova, OneWayAnova};
use super::{json_f64, StatsError};

/// Multiplies a raw p-value by the number of comparisons, capped at 1.
pub fn bonferroni(p: f64, comparisons: usize) -> f64 {
    (p * comparisons as f64).min(1.0)
}

/// Pairwise contrast between two groups: an F(1, N - 2) test with a
/// Bonferroni-adjusted p-value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contrast {
    pub first: String,
    pub second: String,
    pub mean_first: f64,
    pub mean_second: f64,
    pub test: OneWayAnova,
    pub comparisons: usize,
    #[serde(with = "json_f64")]
    pub p_adjusted: f64,
}

pub fn bonferroni_posthoc(
    first: (&str, &[f64]),
    second: (&str, &[f64]),
    comparisons: usize,
) -> Result<Contrast, StatsError> {
    let test = one_way_anova(&[first.1, second.1])?;
    Ok(Contrast {
        first: first.0.to_string(),
        second: second.0.to_string(),
        mean_first: mean(first.1),
        mean_second: mean(second.1),
        p_adjusted: bonferroni(test.p, comparisons),
        comparisons,
        test,
    })
}

/// Every unordered pair of groups, in input order, each adjusted for the
/// total number of pairs.
pub fn all_pairs_posthoc(groups: &[(&str, &[f64])]) -> Result<Vec<Contrast>, StatsError> {
    let m = groups.len() * groups.len().saturating_sub(1) / 2;
    let mut out = Vec::with_capacity(m);
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            out.push(bonferroni_posthoc(groups[i], groups[j], m)?);
        }
    }
    Ok(out)
}
