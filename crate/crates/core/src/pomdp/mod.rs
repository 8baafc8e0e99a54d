//! Generic finite POMDPs: model, beliefs, alpha-vector policies, point-based
//! value iteration, an exhaustive expectimax oracle and fully observable
//! value iteration.

mod belief;
mod expectimax;
mod mdp;
mod model;
mod pbvi;
mod policy;

use thiserror::Error;

pub use belief::{
    belief_update, expected_reward, observation_distribution, predict, reweight_by_observation, sample_index, Belief,
    BELIEF_SUM_TOL,
};
pub use expectimax::{
    exact_expectimax, exact_expectimax_with_budget, expectimax_q_values, tree_size, DEFAULT_NODE_BUDGET,
};
pub use mdp::{solve_fully_observable, StateValues, VALUE_ITERATION_TOL};
pub use model::{ActionId, ModelDump, ModelTables, ObservationId, PomdpModel, StateId, ROW_SUM_TOL};
pub use pbvi::{pbvi_solve, PbviSolution, SolverConfig};
pub use policy::{expected_utility, ActionPrediction, AlphaVector, Policy};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PomdpError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid belief: {0}")]
    InvalidBelief(String),
    #[error("{what} index {index} out of range (size {len})")]
    OutOfRange { what: &'static str, index: usize, len: usize },
    #[error("impossible observation {observation} after action {action} under the given belief")]
    ImpossibleObservation { action: ActionId, observation: ObservationId },
    #[error("policy has no alpha vectors")]
    EmptyPolicy,
    #[error("horizon {horizon} needs {nodes} nodes, budget is {budget}")]
    BudgetExceeded { horizon: usize, nodes: u64, budget: u64 },
}
