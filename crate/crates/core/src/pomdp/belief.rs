use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::{ActionId, ObservationId, PomdpModel, StateId};
use super::PomdpError;

/// Normalization tolerance for belief vectors.
pub const BELIEF_SUM_TOL: f64 = 1e-9;

/// Probability vector over the states of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Belief(Vec<f64>);

impl Belief {
    pub fn new(probs: Vec<f64>) -> Result<Self, PomdpError> {
        if probs.is_empty() {
            return Err(PomdpError::InvalidBelief("empty belief".into()));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(PomdpError::InvalidBelief("entry outside [0, 1]".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > BELIEF_SUM_TOL {
            return Err(PomdpError::InvalidBelief(format!("entries sum to {sum}")));
        }
        Ok(Self(probs))
    }

    /// Normalizes non-negative weights into a belief. Errors if the mass is zero.
    pub fn from_weights(mut weights: Vec<f64>) -> Result<Self, PomdpError> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(PomdpError::InvalidBelief(format!("cannot normalize weights with mass {total}")));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self(weights))
    }

    pub fn degenerate(n_states: usize, s: StateId) -> Self {
        let mut p = vec![0.0; n_states];
        p[s] = 1.0;
        Self(p)
    }

    /// Uniform over `support`, zero elsewhere.
    pub fn uniform_over(n_states: usize, support: &[StateId]) -> Self {
        let mut p = vec![0.0; n_states];
        let w = 1.0 / support.len() as f64;
        for &s in support {
            p[s] = w;
        }
        Self(p)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, s: StateId) -> f64 {
        self.0[s]
    }

    pub fn dot(&self, coeffs: &[f64]) -> f64 {
        self.0.iter().zip(coeffs).map(|(p, c)| p * c).sum()
    }

    pub fn l1_distance(&self, other: &Belief) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }

    /// Index of the single support point, if the belief is degenerate.
    pub fn support_point(&self) -> Option<StateId> {
        let mut found = None;
        for (s, &p) in self.0.iter().enumerate() {
            if p > 0.0 {
                if found.is_some() {
                    return None;
                }
                found = Some(s);
            }
        }
        found.filter(|&s| (self.0[s] - 1.0).abs() <= BELIEF_SUM_TOL)
    }

    pub fn support(&self) -> impl Iterator<Item = StateId> + '_ {
        self.0.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(s, _)| s)
    }

    /// Semicolon-joined decimals, as used in trace files.
    pub fn to_semicolon_string(&self) -> String {
        self.0.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(";")
    }
}

fn check_dim(model: &PomdpModel, b: &Belief) -> Result<(), PomdpError> {
    if b.dim() != model.n_states() {
        return Err(PomdpError::InvalidBelief(format!(
            "belief has {} entries, model has {} states",
            b.dim(),
            model.n_states()
        )));
    }
    Ok(())
}

/// Predicted next-state distribution P(s' | a, b).
pub fn predict(model: &PomdpModel, b: &Belief, a: ActionId) -> Vec<f64> {
    let ns = model.n_states();
    let mut next = vec![0.0; ns];
    for (s, &p) in b.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (n, &t) in model.transition_row(s, a).iter().enumerate() {
            next[n] += p * t;
        }
    }
    next
}

/// P(o | b, a) for every observation.
pub fn observation_distribution(model: &PomdpModel, b: &Belief, a: ActionId) -> Vec<f64> {
    let predicted = predict(model, b, a);
    let mut out = vec![0.0; model.n_observations()];
    for (n, &p) in predicted.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (o, &z) in model.observation_row(n, a).iter().enumerate() {
            out[o] += p * z;
        }
    }
    out
}

/// Bayesian belief update after taking `a` and observing `o`:
/// b'(s') ∝ P(o | s', a) Σ_s P(s' | s, a) b(s).
pub fn belief_update(
    model: &PomdpModel,
    b: &Belief,
    a: ActionId,
    o: ObservationId,
) -> Result<Belief, PomdpError> {
    check_dim(model, b)?;
    model.check_action(a)?;
    model.check_observation(o)?;
    let mut next = predict(model, b, a);
    for (n, p) in next.iter_mut().enumerate() {
        *p *= model.observation_prob(n, a, o);
    }
    let norm: f64 = next.iter().sum();
    if norm <= 0.0 {
        return Err(PomdpError::ImpossibleObservation { action: a, observation: o });
    }
    next.iter_mut().for_each(|p| *p /= norm);
    Ok(Belief(next))
}

/// Reweights a belief by the likelihood of `o` at the current states, without
/// a transition. Used when the same observation is sampled a second time.
pub fn reweight_by_observation(
    model: &PomdpModel,
    b: &Belief,
    a: ActionId,
    o: ObservationId,
) -> Result<Belief, PomdpError> {
    check_dim(model, b)?;
    model.check_action(a)?;
    model.check_observation(o)?;
    let w: Vec<f64> = b
        .probs()
        .iter()
        .enumerate()
        .map(|(s, &p)| p * model.observation_prob(s, a, o))
        .collect();
    let norm: f64 = w.iter().sum();
    if norm <= 0.0 {
        return Err(PomdpError::ImpossibleObservation { action: a, observation: o });
    }
    Ok(Belief(w.into_iter().map(|p| p / norm).collect()))
}

/// Draws an index from a discrete distribution with one uniform. Zero-mass
/// entries are never returned; rounding slack falls to the last positive entry.
pub fn sample_index<R: Rng + ?Sized>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Expected immediate reward Σ_s b(s) R(s, a).
pub fn expected_reward(model: &PomdpModel, b: &Belief, a: ActionId) -> f64 {
    b.probs()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(s, &p)| p * model.reward(s, a))
        .sum()
}
