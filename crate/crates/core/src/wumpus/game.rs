//! The guided Wumpus hunting game as a [`PomdpModel`].
//!
//! Map (column, row), origin bottom-left:
//!
//! ```text
//! row 2 | W .  .
//! row 1 | H W  .
//! row 0 | H H  W
//!         0 1  2
//! ```
//!
//! The hunter walks on `(0,0)`, `(0,1)`, `(1,0)`; the Wumpus hides on one of
//! `(0,2)`, `(1,1)`, `(2,0)`. Moves are up (vertical) or right (horizontal);
//! any move that would leave the walkable tiles sends the hunter back to
//! `(0,0)`. Shooting ends the game.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::pomdp::{Belief, ModelTables, PomdpModel, StateId};

use super::WumpusError;

pub type Tile = (i32, i32);

pub const HUNTER_TILES: [Tile; 3] = [(0, 0), (0, 1), (1, 0)];
pub const WUMPUS_TILES: [Tile; 3] = [(0, 2), (1, 1), (2, 0)];
pub const START_TILE: Tile = (0, 0);
pub const GRID_SIZE: i32 = 3;

/// Index of the absorbing post-shot state.
pub const TERMINAL: StateId = 9;
pub const N_STATES: usize = 10;

pub const STENCH_NEAR: f64 = 0.85;
pub const STENCH_FAR: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WumpusAction {
    MoveVertical,
    MoveHorizontal,
    ShootUp,
    ShootRight,
}

impl WumpusAction {
    pub const ALL: [WumpusAction; 4] =
        [Self::MoveVertical, Self::MoveHorizontal, Self::ShootUp, Self::ShootRight];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn is_shot(self) -> bool {
        matches!(self, Self::ShootUp | Self::ShootRight)
    }

    pub fn direction(self) -> Tile {
        match self {
            Self::MoveVertical | Self::ShootUp => (0, 1),
            Self::MoveHorizontal | Self::ShootRight => (1, 0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::MoveVertical => "MOVE_VERTICAL",
            Self::MoveHorizontal => "MOVE_HORIZONTAL",
            Self::ShootUp => "SHOOT_UP",
            Self::ShootRight => "SHOOT_RIGHT",
        }
    }
}

impl fmt::Display for WumpusAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WumpusObservation {
    Stench,
    Nothing,
}

impl WumpusObservation {
    pub const ALL: [WumpusObservation; 2] = [Self::Stench, Self::Nothing];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Stench => "STENCH",
            Self::Nothing => "NOTHING",
        }
    }
}

impl fmt::Display for WumpusObservation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A decoded model state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WumpusState {
    Playing { hunter: Tile, wumpus: Tile },
    Terminal,
}

impl WumpusState {
    pub fn encode(self) -> StateId {
        match self {
            Self::Terminal => TERMINAL,
            Self::Playing { hunter, wumpus } => {
                let h = HUNTER_TILES.iter().position(|&t| t == hunter).expect("walkable hunter tile");
                let w = WUMPUS_TILES.iter().position(|&t| t == wumpus).expect("wumpus candidate tile");
                h * WUMPUS_TILES.len() + w
            }
        }
    }

    pub fn decode(s: StateId) -> Self {
        if s == TERMINAL {
            return Self::Terminal;
        }
        Self::Playing { hunter: HUNTER_TILES[s / WUMPUS_TILES.len()], wumpus: WUMPUS_TILES[s % WUMPUS_TILES.len()] }
    }

    pub fn hunter(self) -> Option<Tile> {
        match self {
            Self::Playing { hunter, .. } => Some(hunter),
            Self::Terminal => None,
        }
    }

    pub fn wumpus(self) -> Option<Tile> {
        match self {
            Self::Playing { wumpus, .. } => Some(wumpus),
            Self::Terminal => None,
        }
    }
}

/// Which tiles an arrow reaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShootingSemantics {
    /// Only the tile immediately next to the hunter in the shot direction.
    #[default]
    Adjacent,
    /// Every tile in the shot direction up to the edge of the grid.
    Ray,
}

impl std::str::FromStr for ShootingSemantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "adjacent" => Ok(Self::Adjacent),
            "ray" => Ok(Self::Ray),
            other => Err(format!("unknown shooting semantics '{other}' (expected adjacent|ray)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GameConfig {
    pub moving_cost: f64,
    pub hit_reward: f64,
    pub miss_reward: f64,
    pub discount: f64,
    pub shooting: ShootingSemantics,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self { moving_cost: -5.0, hit_reward: 100.0, miss_reward: -100.0, discount: 0.95, shooting: ShootingSemantics::Adjacent }
    }
}

impl GameConfig {
    pub fn with_cost(moving_cost: f64) -> Self {
        Self { moving_cost, ..Self::default() }
    }
}

/// True iff the tiles are at Manhattan distance exactly 1.
pub fn adjacency(a: Tile, b: Tile) -> bool {
    (a.0 - b.0).abs() + (a.1 - b.1).abs() == 1
}

pub fn is_walkable(t: Tile) -> bool {
    HUNTER_TILES.contains(&t)
}

fn step(t: Tile, d: Tile) -> Tile {
    (t.0 + d.0, t.1 + d.1)
}

fn in_grid(t: Tile) -> bool {
    (0..GRID_SIZE).contains(&t.0) && (0..GRID_SIZE).contains(&t.1)
}

/// Destination of a move; illegal destinations send the hunter to the start.
pub fn move_destination(hunter: Tile, action: WumpusAction) -> Tile {
    let dest = step(hunter, action.direction());
    if is_walkable(dest) {
        dest
    } else {
        START_TILE
    }
}

/// The tile immediately next to the hunter in the shot direction.
pub fn shot_target(hunter: Tile, action: WumpusAction) -> Tile {
    step(hunter, action.direction())
}

pub fn shot_hits(hunter: Tile, wumpus: Tile, action: WumpusAction, semantics: ShootingSemantics) -> bool {
    let d = action.direction();
    match semantics {
        ShootingSemantics::Adjacent => step(hunter, d) == wumpus,
        ShootingSemantics::Ray => {
            let mut t = step(hunter, d);
            while in_grid(t) {
                if t == wumpus {
                    return true;
                }
                t = step(t, d);
            }
            false
        }
    }
}

pub fn stench_probability(hunter: Tile, wumpus: Tile) -> f64 {
    if adjacency(hunter, wumpus) {
        STENCH_NEAR
    } else {
        STENCH_FAR
    }
}

/// Uniform over the Wumpus positions with the hunter at the start tile.
pub fn initial_belief() -> Belief {
    let support: Vec<StateId> =
        WUMPUS_TILES.iter().map(|&w| WumpusState::Playing { hunter: START_TILE, wumpus: w }.encode()).collect();
    Belief::uniform_over(N_STATES, &support)
}

pub fn build_model(cfg: &GameConfig) -> Result<PomdpModel, WumpusError> {
    if !(cfg.moving_cost < 0.0) || !cfg.moving_cost.is_finite() {
        return Err(WumpusError::InvalidConfig(format!("moving cost must be negative, got {}", cfg.moving_cost)));
    }
    let na = WumpusAction::ALL.len();
    let no = WumpusObservation::ALL.len();
    let mut transition = vec![vec![vec![0.0; N_STATES]; na]; N_STATES];
    let mut observation = vec![vec![vec![0.0; no]; na]; N_STATES];
    let mut reward = vec![vec![0.0; na]; N_STATES];
    let mut terminal = vec![false; N_STATES];
    terminal[TERMINAL] = true;

    for s in 0..N_STATES {
        let state = WumpusState::decode(s);
        for action in WumpusAction::ALL {
            let a = action.index();
            match state {
                WumpusState::Terminal => {
                    transition[s][a][TERMINAL] = 1.0;
                    observation[s][a][WumpusObservation::Nothing.index()] = 1.0;
                }
                WumpusState::Playing { hunter, wumpus } => {
                    if action.is_shot() {
                        transition[s][a][TERMINAL] = 1.0;
                        reward[s][a] = if shot_hits(hunter, wumpus, action, cfg.shooting) {
                            cfg.hit_reward
                        } else {
                            cfg.miss_reward
                        };
                    } else {
                        let dest = move_destination(hunter, action);
                        transition[s][a][WumpusState::Playing { hunter: dest, wumpus }.encode()] = 1.0;
                        reward[s][a] = cfg.moving_cost;
                    }
                    // observation on arrival at this (non-terminal) state
                    let p = stench_probability(hunter, wumpus);
                    observation[s][a][WumpusObservation::Stench.index()] = p;
                    observation[s][a][WumpusObservation::Nothing.index()] = 1.0 - p;
                }
            }
        }
    }

    let states = (0..N_STATES)
        .map(|s| match WumpusState::decode(s) {
            WumpusState::Terminal => "terminal".to_string(),
            WumpusState::Playing { hunter, wumpus } => {
                format!("hunter({},{})/wumpus({},{})", hunter.0, hunter.1, wumpus.0, wumpus.1)
            }
        })
        .collect();

    PomdpModel::from_tables(ModelTables {
        states,
        actions: WumpusAction::ALL.iter().map(|a| a.name().to_string()).collect(),
        observations: WumpusObservation::ALL.iter().map(|o| o.name().to_string()).collect(),
        transition,
        observation,
        reward,
        terminal,
        discount: cfg.discount,
    })
    .map_err(WumpusError::from)
}
