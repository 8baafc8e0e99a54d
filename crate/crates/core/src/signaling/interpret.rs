use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::pomdp::{reweight_by_observation, ActionId, Belief, ObservationId, Policy, PomdpModel, StateId, StateValues};

use super::utility::{smithian_utility_of_belief, SignalingContext};
use super::{Signal, SignalerConfig, SignalingError};

/// Maps a receiver's belief and a received signal to its updated belief.
pub trait ReceiverInterpretation {
    fn interpret(&self, b: &Belief, u: Signal) -> Result<Belief, SignalingError>;
}

/// POINT is read as a second, independent sample of the pointed observation;
/// NO_POINT carries nothing.
#[derive(Debug, Clone, Copy)]
pub struct LiteralReceiver<'a> {
    pub model: &'a PomdpModel,
    pub last_action: ActionId,
    pub last_observation: ObservationId,
}

impl ReceiverInterpretation for LiteralReceiver<'_> {
    fn interpret(&self, b: &Belief, u: Signal) -> Result<Belief, SignalingError> {
        literal_interpret(self.model, b, u, self.last_observation, self.last_action)
    }
}

pub fn literal_interpret(
    model: &PomdpModel,
    b: &Belief,
    u: Signal,
    last_obs: ObservationId,
    last_action: ActionId,
) -> Result<Belief, SignalingError> {
    match u {
        Signal::Point => Ok(reweight_by_observation(model, b, last_action, last_obs)?),
        Signal::NoPoint => Ok(b.clone()),
    }
}

/// Bayesian inversion of a signaler model: b'(s) ∝ P(u | s) b(s).
///
/// `likelihood[s]` holds `[P(POINT | s), P(NO_POINT | s)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PragmaticReceiver {
    pub likelihood: Vec<[f64; 2]>,
}

impl PragmaticReceiver {
    pub fn from_fn(n_states: usize, f: impl Fn(StateId) -> [f64; 2]) -> Self {
        Self { likelihood: (0..n_states).map(f).collect() }
    }

    /// The level-2 receiver: for every state it considers possible, it
    /// simulates a signaler certain of that state who assumes a literal
    /// receiver holding `b_rec`.
    pub fn level2(
        model: &PomdpModel,
        b_rec: &Belief,
        policy: &Policy,
        continuation: &StateValues,
        cfg: &SignalerConfig,
        literal: &LiteralReceiver<'_>,
    ) -> Result<Self, SignalingError> {
        let mut likelihood = vec![[0.5, 0.5]; model.n_states()];
        for s in b_rec.support() {
            let ctx = SignalingContext::certain(model, s, b_rec.clone(), policy, continuation);
            likelihood[s] = signaler_distribution(&ctx, cfg, literal)?.probs;
        }
        Ok(Self { likelihood })
    }
}

impl ReceiverInterpretation for PragmaticReceiver {
    fn interpret(&self, b: &Belief, u: Signal) -> Result<Belief, SignalingError> {
        pragmatic_interpret(b, u, |s| self.likelihood[s])
    }
}

pub fn pragmatic_interpret(
    b: &Belief,
    u: Signal,
    signaler_fn: impl Fn(StateId) -> [f64; 2],
) -> Result<Belief, SignalingError> {
    let weights: Vec<f64> = b
        .probs()
        .iter()
        .enumerate()
        .map(|(s, &p)| if p > 0.0 { p * signaler_fn(s)[u.index()] } else { 0.0 })
        .collect();
    Belief::from_weights(weights).map_err(|_| SignalingError::IncoherentSignal(u))
}

/// Change in the signaler's estimate of the receiver's well-being caused by `u`.
pub fn svi(
    ctx: &SignalingContext<'_>,
    u: Signal,
    receiver_model: &dyn ReceiverInterpretation,
) -> Result<f64, SignalingError> {
    let before = smithian_utility_of_belief(ctx, &ctx.receiver_belief)?;
    let after_belief = receiver_model.interpret(&ctx.receiver_belief, u)?;
    let after = smithian_utility_of_belief(ctx, &after_belief)?;
    Ok(after - before)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalDistribution {
    /// `[SVI(POINT), SVI(NO_POINT)]`
    pub svi: [f64; 2],
    /// `[P(POINT), P(NO_POINT)]`
    pub probs: [f64; 2],
}

impl SignalDistribution {
    pub fn p(&self, u: Signal) -> f64 {
        self.probs[u.index()]
    }

    pub fn svi_of(&self, u: Signal) -> f64 {
        self.svi[u.index()]
    }
}

/// Numerically stable 1 / (1 + e^{-x}).
fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// P(u) ∝ exp(α [SVI(u) − c(u)]) over {POINT, NO_POINT}.
pub fn signaler_distribution(
    ctx: &SignalingContext<'_>,
    cfg: &SignalerConfig,
    receiver_model: &dyn ReceiverInterpretation,
) -> Result<SignalDistribution, SignalingError> {
    if cfg.alpha.is_nan() || cfg.alpha < 0.0 {
        return Err(SignalingError::InvalidAlpha(cfg.alpha));
    }
    let base = smithian_utility_of_belief(ctx, &ctx.receiver_belief)?;
    let mut svi = [0.0; 2];
    for u in Signal::ALL {
        let b = receiver_model.interpret(&ctx.receiver_belief, u)?;
        svi[u.index()] = smithian_utility_of_belief(ctx, &b)? - base;
    }
    let gap = (svi[0] - cfg.signal_cost(Signal::Point)) - (svi[1] - cfg.signal_cost(Signal::NoPoint));
    let probs = if cfg.alpha == 0.0 {
        [0.5, 0.5]
    } else if cfg.alpha.is_infinite() {
        // argmax; an equal gap goes to NO_POINT
        if gap > 0.0 {
            [1.0, 0.0]
        } else {
            [0.0, 1.0]
        }
    } else {
        // both tails evaluated directly so the smaller one keeps its precision
        [logistic(cfg.alpha * gap), logistic(-cfg.alpha * gap)]
    };
    Ok(SignalDistribution { svi, probs })
}

/// Samples the guide's signal. Always draws exactly one uniform from `rng`.
pub fn guide_step<R: Rng + ?Sized>(
    ctx: &SignalingContext<'_>,
    cfg: &SignalerConfig,
    receiver_model: &dyn ReceiverInterpretation,
    rng: &mut R,
) -> Result<(Signal, SignalDistribution), SignalingError> {
    let dist = signaler_distribution(ctx, cfg, receiver_model)?;
    let u: f64 = rng.gen();
    let signal = if u < dist.probs[0] { Signal::Point } else { Signal::NoPoint };
    log::trace!("guide: svi point {:.4} no-point {:.4} -> {signal}", dist.svi[0], dist.svi[1]);
    Ok((signal, dist))
}
