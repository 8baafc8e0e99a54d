use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::pomdp::solve_fully_observable;
use crate::wumpus::{build_model, GameConfig, HunterModel, TrialRecord, WumpusState, START_TILE, WUMPUS_TILES};

use super::anova::{mean, one_way_anova, two_way_anova, OneWayAnova, TwoWayAnova};
use super::bootstrap::{bootstrap_ci, sample_sd};
use super::posthoc::{all_pairs_posthoc, Contrast};
use super::StatsError;

/// Inputs to [`summarize`] that are not carried by the records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSettings {
    pub stats_seed: u64,
    pub resamples: usize,
    pub ci_level: f64,
    /// Game template for the upper bound; its moving cost is replaced per cell.
    pub game: GameConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub condition: HunterModel,
    pub cost: f64,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostAnova {
    pub cost: f64,
    pub anova: OneWayAnova,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBound {
    pub cost: f64,
    pub value: f64,
}

/// Summary of a complete, balanced experiment.
///
/// In `anova`, factor A is the hunter condition and factor B the moving cost.
/// `posthoc` compares conditions pooled over costs. `per_cost` holds a
/// one-way ANOVA across conditions at each cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub conditions: Vec<HunterModel>,
    pub costs: Vec<f64>,
    pub n_per_cell: usize,
    pub settings: StatsSettings,
    pub cells: Vec<CellSummary>,
    pub anova: TwoWayAnova,
    pub posthoc: Vec<Contrast>,
    pub per_cost: Vec<CostAnova>,
    pub upper_bound: Vec<UpperBound>,
}

impl StatsReport {
    pub fn cell(&self, condition: HunterModel, cost: f64) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.condition == condition && c.cost == cost)
    }

    pub fn bound(&self, cost: f64) -> Option<f64> {
        self.upper_bound.iter().find(|b| b.cost == cost).map(|b| b.value)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, StatsError> {
        serde_json::from_str(text).map_err(|e| StatsError::Serde(e.to_string()))
    }
}

/// Expected reward at the start belief when the Wumpus position is known and
/// future rewards are undiscounted.
pub fn upper_bound(template: &GameConfig, cost: f64) -> Result<f64, StatsError> {
    let cfg = GameConfig { moving_cost: cost, discount: 1.0, ..template.clone() };
    let model = build_model(&cfg)?;
    let values = solve_fully_observable(&model);
    // plain mean over Wumpus positions; weighting by 1/3 would round 97 down
    let sum: f64 = WUMPUS_TILES
        .iter()
        .map(|&w| values.get(WumpusState::Playing { hunter: START_TILE, wumpus: w }.encode()))
        .sum();
    Ok(sum / WUMPUS_TILES.len() as f64)
}

fn first_appearance<T: PartialEq + Copy>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Builds the report. Condition and cost order follow first appearance in
/// `records`. Each cell's bootstrap uses its own stream of the stats seed.
pub fn summarize(records: &[TrialRecord], settings: &StatsSettings) -> Result<StatsReport, StatsError> {
    if records.is_empty() {
        return Err(StatsError::Empty);
    }
    let conditions = first_appearance(records.iter().map(|r| r.condition));
    let costs = first_appearance(records.iter().map(|r| r.moving_cost));
    let table: Vec<Vec<Vec<f64>>> = conditions
        .iter()
        .map(|&c| {
            costs
                .iter()
                .map(|&k| {
                    records.iter().filter(|r| r.condition == c && r.moving_cost == k).map(|r| r.total_reward).collect()
                })
                .collect()
        })
        .collect();
    let anova = two_way_anova(&table)?;
    let n = anova.n_per_cell;

    let mut cells = Vec::with_capacity(conditions.len() * costs.len());
    for (i, &condition) in conditions.iter().enumerate() {
        for (j, &cost) in costs.iter().enumerate() {
            let xs = &table[i][j];
            let mut rng = ChaCha8Rng::seed_from_u64(settings.stats_seed);
            rng.set_stream((i * costs.len() + j) as u64);
            let (ci_low, ci_high) = bootstrap_ci(xs, settings.resamples, settings.ci_level, &mut rng)?;
            let sd = sample_sd(xs);
            cells.push(CellSummary {
                condition,
                cost,
                n,
                mean: mean(xs),
                sd,
                se: sd / (n as f64).sqrt(),
                ci_low,
                ci_high,
            });
        }
    }

    let pooled: Vec<Vec<f64>> = table.iter().map(|row| row.iter().flatten().copied().collect()).collect();
    let groups: Vec<(&str, &[f64])> =
        conditions.iter().zip(&pooled).map(|(c, xs)| (c.name(), xs.as_slice())).collect();
    let posthoc = if conditions.len() >= 2 { all_pairs_posthoc(&groups)? } else { Vec::new() };

    let mut per_cost = Vec::new();
    if conditions.len() >= 2 {
        for (j, &cost) in costs.iter().enumerate() {
            let col: Vec<&[f64]> = table.iter().map(|row| row[j].as_slice()).collect();
            per_cost.push(CostAnova { cost, anova: one_way_anova(&col)? });
        }
    }

    let upper_bound = costs
        .iter()
        .map(|&cost| upper_bound(&settings.game, cost).map(|value| UpperBound { cost, value }))
        .collect::<Result<_, _>>()?;

    Ok(StatsReport {
        conditions,
        costs,
        n_per_cell: n,
        settings: settings.clone(),
        cells,
        anova,
        posthoc,
        per_cost,
        upper_bound,
    })
}

pub const FIGURE_COLUMNS: [&str; 6] = ["cost", "condition", "mean_reward", "ci_low", "ci_high", "upper_bound"];

#[derive(Serialize)]
struct FigureRow<'a> {
    cost: f64,
    condition: &'a str,
    mean_reward: f64,
    ci_low: f64,
    ci_high: f64,
    upper_bound: f64,
}

/// One row per cell, ready for plotting.
pub fn write_figure2<W: Write>(out: W, report: &StatsReport) -> Result<(), StatsError> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| StatsError::Serde(e.to_string());
    if report.cells.is_empty() {
        w.write_record(FIGURE_COLUMNS).map_err(err)?;
    }
    for c in &report.cells {
        w.serialize(FigureRow {
            cost: c.cost,
            condition: c.condition.name(),
            mean_reward: c.mean,
            ci_low: c.ci_low,
            ci_high: c.ci_high,
            upper_bound: report.bound(c.cost).unwrap_or(f64::NAN),
        })
        .map_err(err)?;
    }
    w.flush().map_err(|e| StatsError::Serde(e.to_string()))
}
