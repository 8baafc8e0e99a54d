//! Point-based value iteration.
//!
//! The belief set starts as the initial belief plus every degenerate belief.
//! Each expansion round rolls out ε-greedy trajectories from every point and
//! adds the visited beliefs farthest (L1) from the current set, spreading the
//! point budget evenly over the rounds. Between
//! expansions, point-based backups run until the residual drops below the
//! tolerance or the per-round backup budget is spent.
//!
//! The value function starts from the constant lower bound
//! `min(R_min, 0) / (1 - γ)` (zero on terminal states). A point never keeps a
//! backed-up vector that is worse than its current best, so values at the
//! maintained points never decrease.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::belief::{belief_update, Belief};
use super::belief::sample_index;
use super::model::{ActionId, PomdpModel};
use super::policy::{AlphaVector, Policy};
use super::PomdpError;
use crate::par::Execution;

const ROLLOUT_STEPS: usize = 12;
const ROLLOUTS_PER_POINT: usize = 4;
const EXPLORATION: f64 = 0.3;
const MIN_POINT_DISTANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Maximum number of maintained belief points.
    pub belief_points: usize,
    pub expansion_rounds: usize,
    /// Backup budget per expansion round.
    pub max_backups: usize,
    /// Stop a round once the max value change over the points is below this.
    pub tolerance: f64,
    /// Seed for the expansion simulations.
    pub seed: u64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            belief_points: 64,
            expansion_rounds: 3,
            max_backups: 200,
            tolerance: 1e-6,
            seed: 0x005e_ed0f_9b71,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PbviSolution {
    pub policy: Policy,
    pub belief_points: Vec<Belief>,
    /// Residual of the last backup.
    pub residual: f64,
    pub backups: usize,
    pub converged: bool,
    /// Values at the maintained points after each backup. Points are only
    /// ever appended, so row `i` is a prefix-extension of row `i - 1`.
    pub history: Vec<Vec<f64>>,
}

pub fn pbvi_solve(model: &PomdpModel, initial: &Belief, config: &SolverConfig) -> Result<PbviSolution, PomdpError> {
    if model.discount() >= 1.0 {
        return Err(PomdpError::InvalidModel("point-based value iteration needs discount < 1".into()));
    }
    if initial.dim() != model.n_states() {
        return Err(PomdpError::InvalidBelief("initial belief dimension mismatch".into()));
    }
    let ns = model.n_states();

    let mut points = vec![initial.clone()];
    for s in 0..ns {
        let d = Belief::degenerate(ns, s);
        if !points.contains(&d) {
            points.push(d);
        }
    }
    points.truncate(config.belief_points.max(1));

    let mut gamma_set = vec![lower_bound_vector(model)];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut history = Vec::new();
    let mut residual = f64::INFINITY;
    let mut backups = 0;
    let mut converged = false;

    for round in 0..=config.expansion_rounds {
        if round > 0 {
            let policy = Policy::new(gamma_set.clone())?;
            let rounds_left = config.expansion_rounds - round + 1;
            let quota = config.belief_points.saturating_sub(points.len()).div_ceil(rounds_left);
            let added = expand(model, &policy, &mut points, quota, &mut rng)?;
            log::debug!("pbvi round {round}: +{added} points ({} total)", points.len());
        }
        converged = false;
        for _ in 0..config.max_backups {
            let (next, r, values) = backup_all(model, &gamma_set, &points, config.execution);
            gamma_set = next;
            residual = r;
            backups += 1;
            history.push(values);
            if residual < config.tolerance {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        log::warn!("pbvi stopped at residual {residual:.3e} after {backups} backups");
    }

    Ok(PbviSolution { policy: Policy::new(gamma_set)?, belief_points: points, residual, backups, converged, history })
}

fn lower_bound_vector(model: &PomdpModel) -> AlphaVector {
    let ns = model.n_states();
    let r_min = (0..ns)
        .flat_map(|s| (0..model.n_actions()).map(move |a| (s, a)))
        .map(|(s, a)| model.reward(s, a))
        .fold(0.0_f64, f64::min);
    let floor = r_min / (1.0 - model.discount());
    AlphaVector {
        coeffs: (0..ns).map(|s| if model.is_terminal(s) { 0.0 } else { floor }).collect(),
        action: 0,
    }
}

/// Projected vectors g[a][o][k](s) = Σ_s' T(s,a,s') Z(s',a,o) α_k(s').
fn project(model: &PomdpModel, gamma_set: &[AlphaVector]) -> Vec<Vec<Vec<Vec<f64>>>> {
    let ns = model.n_states();
    (0..model.n_actions())
        .map(|a| {
            (0..model.n_observations())
                .map(|o| {
                    gamma_set
                        .iter()
                        .map(|alpha| {
                            (0..ns)
                                .map(|s| {
                                    model
                                        .transition_row(s, a)
                                        .iter()
                                        .enumerate()
                                        .filter(|(_, &t)| t > 0.0)
                                        .map(|(n, &t)| t * model.observation_prob(n, a, o) * alpha.coeffs[n])
                                        .sum()
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Point-based backup of `gamma_set` at `b`.
pub(crate) fn backup_point(model: &PomdpModel, projected: &[Vec<Vec<Vec<f64>>>], b: &Belief) -> AlphaVector {
    let ns = model.n_states();
    let gamma = model.discount();
    let mut best: Option<(f64, AlphaVector)> = None;
    for (a, per_obs) in projected.iter().enumerate() {
        let mut coeffs: Vec<f64> = (0..ns).map(|s| model.reward(s, a)).collect();
        for candidates in per_obs {
            let mut arg = 0;
            let mut arg_v = f64::NEG_INFINITY;
            for (k, g) in candidates.iter().enumerate() {
                let v = b.dot(g);
                if v > arg_v {
                    arg = k;
                    arg_v = v;
                }
            }
            for (c, g) in coeffs.iter_mut().zip(&candidates[arg]) {
                *c += gamma * g;
            }
        }
        let v = b.dot(&coeffs);
        let better = match &best {
            None => true,
            Some((bv, _)) => v > *bv + 1e-12 * bv.abs().max(1.0),
        };
        if better {
            best = Some((v, AlphaVector { coeffs, action: a as ActionId }));
        }
    }
    best.expect("model has at least one action").1
}

fn backup_all(
    model: &PomdpModel,
    gamma_set: &[AlphaVector],
    points: &[Belief],
    execution: Execution,
) -> (Vec<AlphaVector>, f64, Vec<f64>) {
    let projected = project(model, gamma_set);
    let results = execution.map(points, |b| {
        // exact argmax; the policy's tie tolerance would let the kept value drift down
        let (old_best, old_v) = gamma_set
            .iter()
            .map(|v| (v, v.value(b)))
            .fold(None, |acc: Option<(&AlphaVector, f64)>, (v, x)| match acc {
                Some((_, y)) if y >= x => acc,
                _ => Some((v, x)),
            })
            .expect("non-empty vector set");
        let fresh = backup_point(model, &projected, b);
        let new_v = fresh.value(b);
        if new_v >= old_v {
            (fresh, new_v, new_v - old_v)
        } else {
            (old_best.clone(), old_v, 0.0)
        }
    });

    let mut next: Vec<AlphaVector> = Vec::with_capacity(results.len());
    let mut residual = 0.0_f64;
    let mut values = Vec::with_capacity(results.len());
    for (vec, v, delta) in results {
        residual = residual.max(delta);
        values.push(v);
        if !next.contains(&vec) {
            next.push(vec);
        }
    }
    (next, residual, values)
}

/// Rolls out ε-greedy trajectories from every maintained point and adds the
/// visited beliefs in farthest-first order until `quota` points were added.
fn expand(
    model: &PomdpModel,
    policy: &Policy,
    points: &mut Vec<Belief>,
    quota: usize,
    rng: &mut ChaCha8Rng,
) -> Result<usize, PomdpError> {
    let mut candidates: Vec<Belief> = Vec::new();
    for start in points.iter().flat_map(|p| std::iter::repeat_n(p, ROLLOUTS_PER_POINT)) {
        let mut b = start.clone();
        for _ in 0..ROLLOUT_STEPS {
            if b.support().all(|s| model.is_terminal(s)) {
                break;
            }
            let a = if rng.gen::<f64>() < EXPLORATION {
                rng.gen_range(0..model.n_actions())
            } else {
                policy.greedy_action(&b)
            };
            let s = sample_index(rng, b.probs());
            let next = sample_index(rng, model.transition_row(s, a));
            let o = sample_index(rng, model.observation_row(next, a));
            b = belief_update(model, &b, a, o)?;
            candidates.push(b.clone());
        }
    }

    // min distance from each candidate to the maintained set
    let mut dist: Vec<f64> = candidates
        .iter()
        .map(|c| points.iter().map(|p| p.l1_distance(c)).fold(f64::INFINITY, f64::min))
        .collect();
    let mut added = 0;
    while added < quota {
        let Some((i, &d)) = dist
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1).then(y.0.cmp(&x.0)))
        else {
            break;
        };
        if d <= MIN_POINT_DISTANCE {
            break;
        }
        let chosen = candidates[i].clone();
        for (dj, c) in dist.iter_mut().zip(&candidates) {
            *dj = dj.min(c.l1_distance(&chosen));
        }
        points.push(chosen);
        added += 1;
    }
    Ok(added)
}
