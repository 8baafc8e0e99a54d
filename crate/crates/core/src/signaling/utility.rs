use crate::pomdp::{expected_utility, ActionId, ActionPrediction, Belief, Policy, PomdpModel, StateId, StateValues};

use super::SignalingError;

/// How the signaler scores the outcome of a receiver action.
#[derive(Debug, Clone, Copy)]
pub enum OutcomeUtility<'a> {
    /// Immediate reward plus the discounted fully observable value of the
    /// successor state. Appropriate when the signaler knows the state.
    FullyObservable(&'a StateValues),
    /// Immediate reward plus the receiver policy's value at the successor
    /// belief, both taken under the signaler's belief.
    PolicyLookahead,
}

/// Everything the signaler needs to evaluate a signal.
#[derive(Debug, Clone)]
pub struct SignalingContext<'a> {
    pub model: &'a PomdpModel,
    pub signaler_belief: Belief,
    /// The signaler's copy of the receiver's current belief.
    pub receiver_belief: Belief,
    pub receiver_policy: &'a Policy,
    pub utility: OutcomeUtility<'a>,
    pub prediction: ActionPrediction,
}

impl<'a> SignalingContext<'a> {
    /// A signaler certain that the world is in `true_state`.
    pub fn certain(
        model: &'a PomdpModel,
        true_state: StateId,
        receiver_belief: Belief,
        receiver_policy: &'a Policy,
        continuation: &'a StateValues,
    ) -> Self {
        Self {
            model,
            signaler_belief: Belief::degenerate(model.n_states(), true_state),
            receiver_belief,
            receiver_policy,
            utility: OutcomeUtility::FullyObservable(continuation),
            prediction: ActionPrediction::Greedy,
        }
    }

    /// The state the signaler is certain of.
    pub fn true_state(&self) -> Result<StateId, SignalingError> {
        self.signaler_belief.support_point().ok_or(SignalingError::UncertainSignaler)
    }

    pub fn with_receiver_belief(&self, b: Belief) -> Self {
        Self { receiver_belief: b, ..self.clone() }
    }
}

/// Expected outcome utility of the receiver taking `a`, with outcomes
/// weighted by the signaler's belief.
pub fn smithian_utility_of_action(ctx: &SignalingContext<'_>, a: ActionId) -> Result<f64, SignalingError> {
    let model = ctx.model;
    model.check_action(a)?;
    match ctx.utility {
        OutcomeUtility::FullyObservable(v) => {
            let gamma = model.discount();
            let mut total = 0.0;
            for s in ctx.signaler_belief.support() {
                let p = ctx.signaler_belief.get(s);
                let cont: f64 = model
                    .transition_row(s, a)
                    .iter()
                    .enumerate()
                    .filter(|(_, &t)| t > 0.0)
                    .map(|(n, &t)| t * v.get(n))
                    .sum();
                total += p * (model.reward(s, a) + gamma * cont);
            }
            Ok(total)
        }
        OutcomeUtility::PolicyLookahead => {
            Ok(expected_utility(model, &ctx.signaler_belief, a, ctx.receiver_policy)?)
        }
    }
}

/// Σ_a P(a | b_rec) · smithian_utility_of_action(a).
pub fn smithian_utility_of_belief(ctx: &SignalingContext<'_>, b_rec: &Belief) -> Result<f64, SignalingError> {
    let na = ctx.model.n_actions();
    match ctx.prediction {
        ActionPrediction::Greedy => smithian_utility_of_action(ctx, ctx.receiver_policy.greedy_action(b_rec)),
        rule => {
            let dist = ctx.receiver_policy.action_distribution(b_rec, na, rule);
            let mut total = 0.0;
            for (a, p) in dist.into_iter().enumerate() {
                if p > 0.0 {
                    total += p * smithian_utility_of_action(ctx, a)?;
                }
            }
            Ok(total)
        }
    }
}
