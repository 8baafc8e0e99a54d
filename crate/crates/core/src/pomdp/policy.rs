use serde::{Deserialize, Serialize};

use super::belief::{belief_update, expected_reward, observation_distribution, Belief};
use super::model::{ActionId, PomdpModel};
use super::PomdpError;

/// Values closer than this (scaled by magnitude) are treated as ties.
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaVector {
    pub coeffs: Vec<f64>,
    pub action: ActionId,
}

impl AlphaVector {
    pub fn value(&self, b: &Belief) -> f64 {
        b.dot(&self.coeffs)
    }
}

/// How an observer predicts an agent's action from its belief, P(a | b).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionPrediction {
    /// All mass on the greedy action.
    #[default]
    Greedy,
    /// Softmax over per-action values with the given temperature.
    Softmax { temperature: f64 },
}

/// Piecewise-linear convex value function over beliefs.
///
/// Ties between vectors are broken toward the lowest action index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    vectors: Vec<AlphaVector>,
}

fn is_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOL * a.abs().max(b.abs()).max(1.0)
}

impl Policy {
    pub fn new(vectors: Vec<AlphaVector>) -> Result<Self, PomdpError> {
        if vectors.is_empty() {
            return Err(PomdpError::EmptyPolicy);
        }
        let dim = vectors[0].coeffs.len();
        if vectors.iter().any(|v| v.coeffs.len() != dim) {
            return Err(PomdpError::InvalidModel("alpha vectors differ in dimension".into()));
        }
        Ok(Self { vectors })
    }

    pub fn vectors(&self) -> &[AlphaVector] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].coeffs.len()
    }

    /// The maximizing vector at `b`.
    pub fn best_vector(&self, b: &Belief) -> &AlphaVector {
        let mut best = &self.vectors[0];
        let mut best_v = best.value(b);
        for v in &self.vectors[1..] {
            let val = v.value(b);
            if is_tie(val, best_v) {
                if v.action < best.action {
                    best = v;
                    best_v = val;
                }
            } else if val > best_v {
                best = v;
                best_v = val;
            }
        }
        best
    }

    pub fn value(&self, b: &Belief) -> f64 {
        self.vectors.iter().map(|v| v.value(b)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn greedy_action(&self, b: &Belief) -> ActionId {
        self.best_vector(b).action
    }

    /// Best vector value per action; `None` for actions without a vector.
    pub fn action_values(&self, b: &Belief, n_actions: usize) -> Vec<Option<f64>> {
        let mut out = vec![None; n_actions];
        for v in &self.vectors {
            let val = v.value(b);
            let slot = &mut out[v.action];
            *slot = Some(slot.map_or(val, |cur: f64| cur.max(val)));
        }
        out
    }

    /// P(a | b) under the given prediction rule.
    pub fn action_distribution(&self, b: &Belief, n_actions: usize, rule: ActionPrediction) -> Vec<f64> {
        match rule {
            ActionPrediction::Greedy => {
                let mut p = vec![0.0; n_actions];
                p[self.greedy_action(b)] = 1.0;
                p
            }
            ActionPrediction::Softmax { temperature } => {
                let values = self.action_values(b, n_actions);
                let max = values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
                let w: Vec<f64> = values
                    .iter()
                    .map(|v| v.map_or(0.0, |v| ((v - max) / temperature).exp()))
                    .collect();
                let z: f64 = w.iter().sum();
                w.into_iter().map(|x| x / z).collect()
            }
        }
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            vectors: self
                .vectors
                .iter()
                .map(|v| AlphaVector { coeffs: v.coeffs.iter().map(|c| c * factor).collect(), action: v.action })
                .collect(),
        }
    }
}

/// One-step lookahead value of `a` at `b`, scoring successor beliefs with
/// `value_fn`: R(b, a) + γ Σ_o P(o | b, a) V(b_{a,o}).
///
/// Observations with zero predicted probability are skipped.
pub fn expected_utility(
    model: &PomdpModel,
    b: &Belief,
    a: ActionId,
    value_fn: &Policy,
) -> Result<f64, PomdpError> {
    model.check_action(a)?;
    let mut total = expected_reward(model, b, a);
    let obs = observation_distribution(model, b, a);
    for (o, &p) in obs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let next = belief_update(model, b, a, o)?;
        total += model.discount() * p * value_fn.value(&next);
    }
    Ok(total)
}
