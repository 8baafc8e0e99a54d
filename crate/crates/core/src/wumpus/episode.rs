//! Episode engine: the hunter acts greedily on its PBVI policy, the world
//! answers with a noisy observation, and on stench steps the guide signals.
//!
//! Each episode owns two ChaCha streams derived from its seed: stream 0
//! drives the environment (Wumpus placement, observations), stream 1 drives
//! the guide's signal sampling. Signals therefore never perturb the world.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::pomdp::{
    belief_update, pbvi_solve, sample_index, solve_fully_observable, Belief, PbviSolution, Policy, PomdpModel, SolverConfig,
    StateId, StateValues,
};
use crate::signaling::{
    guide_step, literal_interpret, LiteralReceiver, PragmaticReceiver, ReceiverInterpretation, Signal,
    SignalDistribution, SignalerConfig, SignalingContext,
};

use super::game::{
    build_model, initial_belief, shot_target, GameConfig, Tile, WumpusAction, WumpusObservation, WumpusState,
    START_TILE, WUMPUS_TILES,
};
use super::WumpusError;

const ENV_STREAM: u64 = 0;
const GUIDE_STREAM: u64 = 1;

/// How the hunter reads the guide's signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HunterModel {
    /// Ignores signals.
    Baseline,
    /// Treats POINT as a second sample of the pointed stench.
    LiteralDouble,
    /// Inverts the guide's signaling model.
    Pragmatic,
}

impl HunterModel {
    pub const ALL: [HunterModel; 3] = [Self::Baseline, Self::LiteralDouble, Self::Pragmatic];

    pub fn name(self) -> &'static str {
        match self {
            Self::Baseline => "baseline",
            Self::LiteralDouble => "literal_double",
            Self::Pragmatic => "pragmatic",
        }
    }
}

impl fmt::Display for HunterModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HunterModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Self::Baseline),
            "literal_double" | "literal" | "double" => Ok(Self::LiteralDouble),
            "pragmatic" => Ok(Self::Pragmatic),
            other => Err(format!("unknown condition '{other}' (expected baseline|literal_double|pragmatic)")),
        }
    }
}

/// A game solved once per moving cost and shared by every condition.
#[derive(Debug, Clone)]
pub struct SolvedGame {
    pub config: GameConfig,
    pub model: PomdpModel,
    pub policy: Policy,
    /// Discounted fully observable values, used as the signaler's continuation.
    pub continuation: StateValues,
}

impl SolvedGame {
    pub fn solve(config: &GameConfig, solver: &SolverConfig) -> Result<(Self, PbviSolution), WumpusError> {
        let model = build_model(config)?;
        let solution = pbvi_solve(&model, &initial_belief(), solver)?;
        let game = Self::from_policy(config, solution.policy.clone())?;
        Ok((game, solution))
    }

    pub fn from_policy(config: &GameConfig, policy: Policy) -> Result<Self, WumpusError> {
        let model = build_model(config)?;
        if policy.dim() != model.n_states() {
            return Err(WumpusError::InvalidConfig("policy dimension does not match the game".into()));
        }
        let continuation = solve_fully_observable(&model);
        Ok(Self { config: config.clone(), model, policy, continuation })
    }

    /// Applies the hunter's signal-reading rule.
    pub fn interpret(
        &self,
        hunter: HunterModel,
        b: &Belief,
        u: Signal,
        action: WumpusAction,
        observation: WumpusObservation,
        signaler: &SignalerConfig,
    ) -> Result<Belief, WumpusError> {
        Ok(match hunter {
            HunterModel::Baseline => b.clone(),
            HunterModel::LiteralDouble => literal_interpret(&self.model, b, u, observation.index(), action.index())?,
            HunterModel::Pragmatic => {
                let literal = self.literal(action, observation);
                PragmaticReceiver::level2(&self.model, b, &self.policy, &self.continuation, signaler, &literal)?
                    .interpret(b, u)?
            }
        })
    }

    pub fn literal(&self, action: WumpusAction, observation: WumpusObservation) -> LiteralReceiver<'_> {
        LiteralReceiver { model: &self.model, last_action: action.index(), last_observation: observation.index() }
    }

    /// The guide's signal for a hunter holding `receiver_belief` in `true_state`.
    pub fn guide_signal<R: Rng + ?Sized>(
        &self,
        true_state: StateId,
        receiver_belief: &Belief,
        action: WumpusAction,
        observation: WumpusObservation,
        signaler: &SignalerConfig,
        rng: &mut R,
    ) -> Result<(Signal, SignalDistribution), WumpusError> {
        let ctx =
            SignalingContext::certain(&self.model, true_state, receiver_belief.clone(), &self.policy, &self.continuation);
        let literal = self.literal(action, observation);
        Ok(guide_step(&ctx, signaler, &literal, rng)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self { max_steps: 20, seed: 0 }
    }
}

/// The guide's decision on one stench step.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalEvent {
    pub distribution: SignalDistribution,
    pub signal: Signal,
    pub belief_before: Belief,
    pub belief_after: Belief,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    pub step: usize,
    /// Tile the action was taken from.
    pub hunter_pos: Tile,
    pub action: WumpusAction,
    /// Tile after the action; `None` once the game has ended.
    pub arrived: Option<Tile>,
    pub observation: Option<WumpusObservation>,
    pub reward: f64,
    pub signal: Option<SignalEvent>,
}

/// One episode.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub condition: HunterModel,
    pub moving_cost: f64,
    pub seed: u64,
    pub steps: usize,
    pub shot_action: Option<WumpusAction>,
    pub shot_tile: Option<Tile>,
    pub wumpus_pos: Tile,
    pub hit: bool,
    pub total_reward: f64,
    pub cap_hit: bool,
    pub n_points: usize,
    pub n_stench: usize,
    /// Per-step detail; empty unless tracing was requested.
    pub trace: Vec<StepTrace>,
}

/// Plays one episode. With `guide = None` no signals are produced.
pub fn run_episode(
    game: &SolvedGame,
    cfg: &EpisodeConfig,
    hunter: HunterModel,
    guide: Option<&SignalerConfig>,
    trace: bool,
) -> Result<TrialRecord, WumpusError> {
    if cfg.max_steps == 0 {
        return Err(WumpusError::InvalidConfig("max_steps must be positive".into()));
    }
    let mut env_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    env_rng.set_stream(ENV_STREAM);
    let mut guide_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    guide_rng.set_stream(GUIDE_STREAM);

    let model = &game.model;
    let wumpus = WUMPUS_TILES[env_rng.gen_range(0..WUMPUS_TILES.len())];
    let mut state = WumpusState::Playing { hunter: START_TILE, wumpus }.encode();
    let mut belief = initial_belief();
    // the guide's replica of the hunter's belief
    let mut tracked = belief.clone();

    let mut record = TrialRecord {
        condition: hunter,
        moving_cost: game.config.moving_cost,
        seed: cfg.seed,
        steps: 0,
        shot_action: None,
        shot_tile: None,
        wumpus_pos: wumpus,
        hit: false,
        total_reward: 0.0,
        cap_hit: false,
        n_points: 0,
        n_stench: 0,
        trace: Vec::new(),
    };

    for step in 1..=cfg.max_steps {
        let hunter_pos = WumpusState::decode(state).hunter().expect("episode state is non-terminal");
        let a = game.policy.greedy_action(&belief);
        let action = WumpusAction::from_index(a).expect("policy action in range");
        let reward = model.reward(state, a);
        record.total_reward += reward;
        record.steps = step;

        let next = sample_index(&mut env_rng, model.transition_row(state, a));
        let o = sample_index(&mut env_rng, model.observation_row(next, a));
        let observation = WumpusObservation::from_index(o).expect("observation in range");

        if model.is_terminal(next) {
            record.shot_action = Some(action);
            record.shot_tile = Some(shot_target(hunter_pos, action));
            record.hit = reward == game.config.hit_reward;
            if trace {
                record.trace.push(StepTrace {
                    step,
                    hunter_pos,
                    action,
                    arrived: None,
                    observation: None,
                    reward,
                    signal: None,
                });
            }
            return Ok(record);
        }

        belief = belief_update(model, &belief, a, o)?;
        tracked = belief_update(model, &tracked, a, o)?;

        let mut event = None;
        if observation == WumpusObservation::Stench {
            record.n_stench += 1;
            if let Some(signaler) = guide {
                let (signal, distribution) =
                    game.guide_signal(next, &tracked, action, observation, signaler, &mut guide_rng)?;
                if signal == Signal::Point {
                    record.n_points += 1;
                }
                let before = belief.clone();
                belief = game.interpret(hunter, &belief, signal, action, observation, signaler)?;
                tracked = game.interpret(hunter, &tracked, signal, action, observation, signaler)?;
                debug_assert_eq!(belief, tracked, "guide lost track of the hunter's belief");
                if trace {
                    event = Some(SignalEvent { distribution, signal, belief_before: before, belief_after: belief.clone() });
                }
            }
        }
        if trace {
            record.trace.push(StepTrace {
                step,
                hunter_pos,
                action,
                arrived: WumpusState::decode(next).hunter(),
                observation: Some(observation),
                reward,
                signal: event,
            });
        }
        state = next;
    }

    record.cap_hit = true;
    log::debug!("episode seed {} ({hunter}) hit the {}-step cap", cfg.seed, cfg.max_steps);
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solved(cost: f64) -> SolvedGame {
        SolvedGame::solve(&GameConfig::with_cost(cost), &SolverConfig::default()).unwrap().0
    }

    #[test]
    fn baseline_ignores_guide() {
        let game = solved(-3.0);
        for seed in 0..40 {
            let cfg = EpisodeConfig { max_steps: 20, seed };
            let with = run_episode(&game, &cfg, HunterModel::Baseline, Some(&SignalerConfig::default()), false).unwrap();
            let without = run_episode(&game, &cfg, HunterModel::Baseline, None, false).unwrap();
            assert_eq!(with.total_reward, without.total_reward);
            assert_eq!(with.steps, without.steps);
            assert_eq!(with.shot_tile, without.shot_tile);
            assert_eq!(with.n_stench, without.n_stench);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let game = solved(-5.0);
        let cfg = EpisodeConfig { max_steps: 20, seed: 99 };
        let g = SignalerConfig::default();
        let a = run_episode(&game, &cfg, HunterModel::Pragmatic, Some(&g), true).unwrap();
        let b = run_episode(&game, &cfg, HunterModel::Pragmatic, Some(&g), true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn one_shot_per_episode() {
        let game = solved(-1.0);
        for seed in 0..50 {
            let r = run_episode(&game, &EpisodeConfig { max_steps: 20, seed }, HunterModel::LiteralDouble, Some(&SignalerConfig::default()), true)
                .unwrap();
            let shots = r.trace.iter().filter(|s| s.action.is_shot()).count();
            assert_eq!(shots, usize::from(!r.cap_hit));
            assert!(r.total_reward <= 100.0 + game.config.moving_cost);
        }
    }
}
