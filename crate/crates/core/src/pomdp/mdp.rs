use serde::{Deserialize, Serialize};

use super::model::{PomdpModel, StateId};

pub const VALUE_ITERATION_TOL: f64 = 1e-9;
const MAX_SWEEPS: usize = 1_000_000;

/// Optimal value per state of the fully observable MDP underlying a POMDP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateValues(pub Vec<f64>);

impl StateValues {
    pub fn get(&self, s: StateId) -> f64 {
        self.0[s]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Value iteration over states, ignoring observations, with the model's own
/// discount. Terminal states are pinned at 0. With discount 1 this converges
/// for models where every policy worth following reaches a terminal state
/// (negative step costs).
pub fn solve_fully_observable(model: &PomdpModel) -> StateValues {
    let ns = model.n_states();
    let gamma = model.discount();
    let mut v = vec![0.0; ns];
    for sweep in 0..MAX_SWEEPS {
        let mut delta = 0.0_f64;
        let next: Vec<f64> = (0..ns)
            .map(|s| {
                if model.is_terminal(s) {
                    return 0.0;
                }
                (0..model.n_actions())
                    .map(|a| {
                        let future: f64 =
                            model.transition_row(s, a).iter().zip(&v).map(|(t, vn)| t * vn).sum();
                        model.reward(s, a) + gamma * future
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        for (a, b) in next.iter().zip(&v) {
            delta = delta.max((a - b).abs());
        }
        v = next;
        if delta < VALUE_ITERATION_TOL {
            log::trace!("value iteration converged after {} sweeps", sweep + 1);
            break;
        }
    }
    StateValues(v)
}
