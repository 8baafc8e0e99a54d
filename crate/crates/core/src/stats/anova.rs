use serde::{Deserialize, Serialize};

use super::fdist::f_survival;
use super::{json_f64, StatsError};

/// One row of an ANOVA table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub ss: f64,
    pub df: f64,
    pub ms: f64,
    /// +inf when the error mean square is zero and the effect is not.
    #[serde(with = "json_f64")]
    pub f: f64,
    #[serde(with = "json_f64")]
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTerm {
    pub ss: f64,
    pub df: f64,
    pub ms: f64,
}

/// Fixed-effects two-way ANOVA with interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoWayAnova {
    /// Row factor.
    pub factor_a: Effect,
    /// Column factor.
    pub factor_b: Effect,
    pub interaction: Effect,
    pub error: ErrorTerm,
    pub ss_total: f64,
    pub n_per_cell: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneWayAnova {
    pub ss_between: f64,
    pub ss_within: f64,
    pub df_between: f64,
    pub df_within: f64,
    #[serde(with = "json_f64")]
    pub f: f64,
    #[serde(with = "json_f64")]
    pub p: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sums of squares below this fraction of Σx² are rounding residue.
const SS_NOISE: f64 = 1e-24;

fn denoise(ss: f64, scale: f64) -> f64 {
    if ss <= SS_NOISE * scale {
        0.0
    } else {
        ss
    }
}

/// F ratio with the degenerate cases pinned: 0/0 is 0 and x/0 is +inf.
fn f_and_p(ms_effect: f64, ms_error: f64, df1: f64, df2: f64) -> (f64, f64) {
    if ms_error == 0.0 {
        if ms_effect == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let f = ms_effect / ms_error;
        (f, f_survival(f, df1, df2))
    }
}

fn effect(ss: f64, df: f64, error: &ErrorTerm) -> Effect {
    let ms = if df > 0.0 { ss / df } else { 0.0 };
    let (f, p) = f_and_p(ms, error.ms, df, error.df);
    Effect { ss, df, ms, f, p }
}

/// `table[i][j]` holds the observations of row level i and column level j.
/// Every cell must have the same, non-zero size.
pub fn two_way_anova(table: &[Vec<Vec<f64>>]) -> Result<TwoWayAnova, StatsError> {
    let a = table.len();
    if a == 0 || table[0].is_empty() {
        return Err(StatsError::Empty);
    }
    let b = table[0].len();
    let n = table[0][0].len();
    if n == 0 {
        return Err(StatsError::Empty);
    }
    for (i, row) in table.iter().enumerate() {
        if row.len() != b {
            return Err(StatsError::Unbalanced(format!("row {i} has {} columns, expected {b}", row.len())));
        }
        for (j, cell) in row.iter().enumerate() {
            if cell.len() != n {
                return Err(StatsError::Unbalanced(format!("cell ({i}, {j}) has {} observations, expected {n}", cell.len())));
            }
        }
    }
    let all: Vec<f64> = table.iter().flatten().flatten().copied().collect();
    let grand = mean(&all);
    let scale: f64 = all.iter().map(|x| x * x).sum::<f64>() + f64::MIN_POSITIVE;

    let cell_mean: Vec<Vec<f64>> = table.iter().map(|row| row.iter().map(|c| mean(c)).collect()).collect();
    let row_mean: Vec<f64> = cell_mean.iter().map(|r| mean(r)).collect();
    let col_mean: Vec<f64> = (0..b).map(|j| cell_mean.iter().map(|r| r[j]).sum::<f64>() / a as f64).collect();

    let nf = n as f64;
    let ss_a = denoise(b as f64 * nf * row_mean.iter().map(|m| (m - grand).powi(2)).sum::<f64>(), scale);
    let ss_b = denoise(a as f64 * nf * col_mean.iter().map(|m| (m - grand).powi(2)).sum::<f64>(), scale);
    let mut ss_ab = 0.0;
    let mut ss_e = 0.0;
    for i in 0..a {
        for j in 0..b {
            ss_ab += (cell_mean[i][j] - row_mean[i] - col_mean[j] + grand).powi(2);
            ss_e += table[i][j].iter().map(|x| (x - cell_mean[i][j]).powi(2)).sum::<f64>();
        }
    }
    let ss_ab = denoise(nf * ss_ab, scale);
    let ss_e = denoise(ss_e, scale);
    let ss_total = denoise(all.iter().map(|x| (x - grand).powi(2)).sum(), scale);

    let df_e = (a * b * (n - 1)) as f64;
    let error = ErrorTerm { ss: ss_e, df: df_e, ms: if df_e > 0.0 { ss_e / df_e } else { 0.0 } };
    Ok(TwoWayAnova {
        factor_a: effect(ss_a, (a - 1) as f64, &error),
        factor_b: effect(ss_b, (b - 1) as f64, &error),
        interaction: effect(ss_ab, ((a - 1) * (b - 1)) as f64, &error),
        error,
        ss_total,
        n_per_cell: n,
    })
}

/// One-way ANOVA over groups of possibly unequal size.
pub fn one_way_anova(groups: &[&[f64]]) -> Result<OneWayAnova, StatsError> {
    if groups.len() < 2 || groups.iter().any(|g| g.is_empty()) {
        return Err(StatsError::Empty);
    }
    let all: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    let grand = mean(&all);
    let scale: f64 = all.iter().map(|x| x * x).sum::<f64>() + f64::MIN_POSITIVE;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let m = mean(g);
        ss_between += g.len() as f64 * (m - grand).powi(2);
        ss_within += g.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    }
    let ss_between = denoise(ss_between, scale);
    let ss_within = denoise(ss_within, scale);
    let df_between = (groups.len() - 1) as f64;
    let df_within = (all.len() - groups.len()) as f64;
    let ms_within = if df_within > 0.0 { ss_within / df_within } else { 0.0 };
    let (f, p) = f_and_p(ss_between / df_between, ms_within, df_between, df_within);
    Ok(OneWayAnova { ss_between, ss_within, df_between, df_within, f, p })
}
