//! Dense finite POMDP representation.
//!
//! Tables are stored flat and indexed as:
//! - transition: `[action][state][next_state]`
//! - observation: `[action][next_state][observation]`
//! - reward: `[state][action]`

use serde::{Deserialize, Serialize};

use super::PomdpError;

pub type StateId = usize;
pub type ActionId = usize;
pub type ObservationId = usize;

/// Row-sum tolerance for transition and observation distributions.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Dense tables used to construct a [`PomdpModel`].
///
/// `transition[s][a]` is the distribution over next states,
/// `observation[s_next][a]` the distribution over observations and
/// `reward[s][a]` the immediate reward.
#[derive(Debug, Clone)]
pub struct ModelTables {
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub observations: Vec<String>,
    pub transition: Vec<Vec<Vec<f64>>>,
    pub observation: Vec<Vec<Vec<f64>>>,
    pub reward: Vec<Vec<f64>>,
    pub terminal: Vec<bool>,
    pub discount: f64,
}

/// A validated, immutable finite POMDP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PomdpModel {
    states: Vec<String>,
    actions: Vec<String>,
    observations: Vec<String>,
    transition: Vec<f64>,
    observation: Vec<f64>,
    reward: Vec<f64>,
    terminal: Vec<bool>,
    discount: f64,
}

impl PomdpModel {
    pub fn from_tables(t: ModelTables) -> Result<Self, PomdpError> {
        let ns = t.states.len();
        let na = t.actions.len();
        let no = t.observations.len();
        if ns == 0 || na == 0 || no == 0 {
            return Err(PomdpError::InvalidModel(
                "state, action and observation sets must be non-empty".into(),
            ));
        }
        if !(t.discount > 0.0 && t.discount <= 1.0) {
            return Err(PomdpError::InvalidModel(format!(
                "discount must lie in (0, 1], got {}",
                t.discount
            )));
        }
        if t.transition.len() != ns || t.observation.len() != ns || t.reward.len() != ns {
            return Err(PomdpError::InvalidModel("table row count != state count".into()));
        }
        if t.terminal.len() != ns {
            return Err(PomdpError::InvalidModel("terminal mask length != state count".into()));
        }

        let mut transition = vec![0.0; na * ns * ns];
        let mut observation = vec![0.0; na * ns * no];
        let mut reward = vec![0.0; ns * na];
        for s in 0..ns {
            if t.transition[s].len() != na || t.observation[s].len() != na || t.reward[s].len() != na {
                return Err(PomdpError::InvalidModel(format!(
                    "state {s}: per-action table length != action count"
                )));
            }
            for a in 0..na {
                let row = &t.transition[s][a];
                check_row(row, ns, || format!("transition(s={s}, a={a})"))?;
                transition[(a * ns + s) * ns..(a * ns + s + 1) * ns].copy_from_slice(row);

                let orow = &t.observation[s][a];
                check_row(orow, no, || format!("observation(s'={s}, a={a})"))?;
                observation[(a * ns + s) * no..(a * ns + s + 1) * no].copy_from_slice(orow);

                let r = t.reward[s][a];
                if !r.is_finite() {
                    return Err(PomdpError::InvalidModel(format!("reward(s={s}, a={a}) is not finite")));
                }
                reward[s * na + a] = r;

                if t.terminal[s] {
                    if (row[s] - 1.0).abs() > ROW_SUM_TOL {
                        return Err(PomdpError::InvalidModel(format!(
                            "terminal state {s} must self-transition under action {a}"
                        )));
                    }
                    if r != 0.0 {
                        return Err(PomdpError::InvalidModel(format!(
                            "terminal state {s} must yield reward 0 under action {a}"
                        )));
                    }
                }
            }
        }

        Ok(Self {
            states: t.states,
            actions: t.actions,
            observations: t.observations,
            transition,
            observation,
            reward,
            terminal: t.terminal,
            discount: t.discount,
        })
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn n_observations(&self) -> usize {
        self.observations.len()
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// Same model with a different discount factor.
    pub fn with_discount(&self, discount: f64) -> Result<Self, PomdpError> {
        if !(discount > 0.0 && discount <= 1.0) {
            return Err(PomdpError::InvalidModel(format!(
                "discount must lie in (0, 1], got {discount}"
            )));
        }
        Ok(Self { discount, ..self.clone() })
    }

    pub fn state_label(&self, s: StateId) -> &str {
        &self.states[s]
    }

    pub fn action_label(&self, a: ActionId) -> &str {
        &self.actions[a]
    }

    pub fn observation_label(&self, o: ObservationId) -> &str {
        &self.observations[o]
    }

    pub fn is_terminal(&self, s: StateId) -> bool {
        self.terminal[s]
    }

    /// P(s' | s, a) for all s'.
    pub fn transition_row(&self, s: StateId, a: ActionId) -> &[f64] {
        let ns = self.n_states();
        &self.transition[(a * ns + s) * ns..(a * ns + s + 1) * ns]
    }

    pub fn transition(&self, s: StateId, a: ActionId, next: StateId) -> f64 {
        self.transition_row(s, a)[next]
    }

    /// P(o | s', a) for all o.
    pub fn observation_row(&self, next: StateId, a: ActionId) -> &[f64] {
        let ns = self.n_states();
        let no = self.n_observations();
        &self.observation[(a * ns + next) * no..(a * ns + next + 1) * no]
    }

    pub fn observation_prob(&self, next: StateId, a: ActionId, o: ObservationId) -> f64 {
        self.observation_row(next, a)[o]
    }

    pub fn reward(&self, s: StateId, a: ActionId) -> f64 {
        self.reward[s * self.n_actions() + a]
    }

    pub fn check_action(&self, a: ActionId) -> Result<(), PomdpError> {
        if a < self.n_actions() {
            Ok(())
        } else {
            Err(PomdpError::OutOfRange { what: "action", index: a, len: self.n_actions() })
        }
    }

    pub fn check_observation(&self, o: ObservationId) -> Result<(), PomdpError> {
        if o < self.n_observations() {
            Ok(())
        } else {
            Err(PomdpError::OutOfRange { what: "observation", index: o, len: self.n_observations() })
        }
    }

    /// Human-readable dump of the full model, for debugging.
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&ModelDump::from(self)).expect("model dump is serializable")
    }
}

fn check_row(row: &[f64], len: usize, ctx: impl Fn() -> String) -> Result<(), PomdpError> {
    if row.len() != len {
        return Err(PomdpError::InvalidModel(format!("{}: expected {len} entries, got {}", ctx(), row.len())));
    }
    if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(PomdpError::InvalidModel(format!("{}: entry outside [0, 1]", ctx())));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(PomdpError::InvalidModel(format!("{}: row sums to {sum}", ctx())));
    }
    Ok(())
}

/// Nested, label-keyed view of a model used by the introspection dump.
///
/// Schema (JSON):
/// ```text
/// {
///   "states": [str], "actions": [str], "observations": [str],
///   "discount": f64, "terminal": [bool],
///   "transition":  [[[f64]]]   // [state][action][next_state]
///   "observation": [[[f64]]]   // [next_state][action][observation]
///   "reward":      [[f64]]     // [state][action]
/// }
/// ```
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelDump {
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub observations: Vec<String>,
    pub discount: f64,
    pub terminal: Vec<bool>,
    pub transition: Vec<Vec<Vec<f64>>>,
    pub observation: Vec<Vec<Vec<f64>>>,
    pub reward: Vec<Vec<f64>>,
}

impl From<&PomdpModel> for ModelDump {
    fn from(m: &PomdpModel) -> Self {
        let ns = m.n_states();
        let na = m.n_actions();
        Self {
            states: m.states.clone(),
            actions: m.actions.clone(),
            observations: m.observations.clone(),
            discount: m.discount,
            terminal: m.terminal.clone(),
            transition: (0..ns)
                .map(|s| (0..na).map(|a| m.transition_row(s, a).to_vec()).collect())
                .collect(),
            observation: (0..ns)
                .map(|s| (0..na).map(|a| m.observation_row(s, a).to_vec()).collect())
                .collect(),
            reward: (0..ns).map(|s| (0..na).map(|a| m.reward(s, a)).collect()).collect(),
        }
    }
}

impl TryFrom<ModelDump> for PomdpModel {
    type Error = PomdpError;

    fn try_from(d: ModelDump) -> Result<Self, Self::Error> {
        PomdpModel::from_tables(ModelTables {
            states: d.states,
            actions: d.actions,
            observations: d.observations,
            transition: d.transition,
            observation: d.observation,
            reward: d.reward,
            terminal: d.terminal,
            discount: d.discount,
        })
    }
}
