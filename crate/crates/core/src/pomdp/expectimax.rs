//! Exhaustive finite-horizon expectimax over the belief tree.
//!
//! Used as a ground-truth oracle for small models.

use super::belief::{belief_update, expected_reward, observation_distribution, Belief};
use super::model::{ActionId, PomdpModel};
use super::PomdpError;

pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;

const TIE_TOL: f64 = 1e-9;

/// Worst-case number of belief nodes visited for `horizon` steps.
pub fn tree_size(model: &PomdpModel, horizon: usize) -> u64 {
    let branching = (model.n_actions() * model.n_observations()) as u64;
    let mut total: u64 = 1;
    let mut level: u64 = 1;
    for _ in 0..horizon {
        level = level.saturating_mul(branching);
        total = total.saturating_add(level);
    }
    total
}

/// Optimal discounted `horizon`-step value at `b` and an optimal first action
/// (lowest index among ties). Horizon 0 returns value 0 and action 0.
pub fn exact_expectimax(model: &PomdpModel, b: &Belief, horizon: usize) -> Result<(f64, ActionId), PomdpError> {
    exact_expectimax_with_budget(model, b, horizon, DEFAULT_NODE_BUDGET)
}

pub fn exact_expectimax_with_budget(
    model: &PomdpModel,
    b: &Belief,
    horizon: usize,
    node_budget: u64,
) -> Result<(f64, ActionId), PomdpError> {
    let nodes = tree_size(model, horizon);
    if nodes > node_budget {
        return Err(PomdpError::BudgetExceeded { horizon, nodes, budget: node_budget });
    }
    let q = q_values_unchecked(model, b, horizon)?;
    Ok(argmax(&q))
}

/// Horizon-`horizon` Q-value of every first action at `b`.
pub fn expectimax_q_values(model: &PomdpModel, b: &Belief, horizon: usize) -> Result<Vec<f64>, PomdpError> {
    let nodes = tree_size(model, horizon);
    if nodes > DEFAULT_NODE_BUDGET {
        return Err(PomdpError::BudgetExceeded { horizon, nodes, budget: DEFAULT_NODE_BUDGET });
    }
    q_values_unchecked(model, b, horizon)
}

fn argmax(q: &[f64]) -> (f64, ActionId) {
    let mut best = (q.first().copied().unwrap_or(0.0), 0);
    for (a, &v) in q.iter().enumerate().skip(1) {
        if v > best.0 + TIE_TOL * best.0.abs().max(1.0) {
            best = (v, a);
        }
    }
    best
}

fn q_values_unchecked(model: &PomdpModel, b: &Belief, horizon: usize) -> Result<Vec<f64>, PomdpError> {
    if horizon == 0 {
        return Ok(vec![0.0; model.n_actions()]);
    }
    (0..model.n_actions()).map(|a| q_value(model, b, a, horizon)).collect()
}

fn q_value(model: &PomdpModel, b: &Belief, a: ActionId, horizon: usize) -> Result<f64, PomdpError> {
    let mut total = expected_reward(model, b, a);
    if horizon > 1 {
        for (o, &p) in observation_distribution(model, b, a).iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let next = belief_update(model, b, a, o)?;
            total += model.discount() * p * value(model, &next, horizon - 1)?;
        }
    }
    Ok(total)
}

fn value(model: &PomdpModel, b: &Belief, horizon: usize) -> Result<f64, PomdpError> {
    if horizon == 0 {
        return Ok(0.0);
    }
    // absorbing zero-reward region: nothing more to earn
    if b.support().all(|s| model.is_terminal(s)) {
        return Ok(0.0);
    }
    let mut best = f64::NEG_INFINITY;
    for a in 0..model.n_actions() {
        best = best.max(q_value(model, b, a, horizon)?);
    }
    Ok(best)
}
