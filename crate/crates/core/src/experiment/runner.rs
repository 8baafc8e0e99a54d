use crate::pomdp::PbviSolution;
use crate::wumpus::{run_episode, EpisodeConfig, HunterModel, SolvedGame, TrialRecord};

use super::plan::ExperimentPlan;
use super::seeds::trial_seed;
use super::ExperimentError;

/// Solved games keyed by moving cost. Every condition at a cost shares the
/// same policy; conditions differ only in how the hunter reads signals.
#[derive(Debug, Clone, Default)]
pub struct PolicyCache {
    games: Vec<(f64, SolvedGame)>,
}

impl PolicyCache {
    pub fn insert(&mut self, game: SolvedGame) {
        let cost = game.config.moving_cost;
        self.games.retain(|(c, _)| *c != cost);
        self.games.push((cost, game));
    }

    pub fn get(&self, cost: f64) -> Option<&SolvedGame> {
        self.games.iter().find(|(c, _)| *c == cost).map(|(_, g)| g)
    }

    pub fn games(&self) -> impl Iterator<Item = &SolvedGame> {
        self.games.iter().map(|(_, g)| g)
    }
}

/// Solves the game once per cost of the plan.
pub fn solve_policies(plan: &ExperimentPlan) -> Result<(PolicyCache, Vec<PbviSolution>), ExperimentError> {
    plan.validate()?;
    let solver = plan.solver_config();
    let mut cache = PolicyCache::default();
    let mut solutions = Vec::with_capacity(plan.costs.len());
    for &cost in &plan.costs {
        let (game, sol) = SolvedGame::solve(&plan.game_config(cost), &solver)
            .map_err(|source| ExperimentError::Solve { cost, source })?;
        log::info!(
            "cost {cost}: {} alpha vectors over {} points, {} backups, residual {:.2e}",
            sol.policy.vectors().len(),
            sol.belief_points.len(),
            sol.backups,
            sol.residual
        );
        cache.insert(game);
        solutions.push(sol);
    }
    Ok((cache, solutions))
}

/// Solves every cost, then runs every trial of the plan.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<TrialRecord>, ExperimentError> {
    let (cache, _) = solve_policies(plan)?;
    run_with_cache(plan, &cache, false)
}

/// Runs every trial with pre-solved games. Records come back in
/// (condition, cost, trial) order whatever the execution mode.
pub fn run_with_cache(
    plan: &ExperimentPlan,
    cache: &PolicyCache,
    trace: bool,
) -> Result<Vec<TrialRecord>, ExperimentError> {
    plan.validate()?;
    let signaler = plan.signaler()?;
    let mut jobs = Vec::with_capacity(plan.total_trials());
    for &condition in &plan.conditions {
        for &cost in &plan.costs {
            let game = cache.get(cost).ok_or(ExperimentError::MissingPolicy(cost))?;
            for trial in 0..plan.trials_per_cell {
                jobs.push((condition, game, trial));
            }
        }
    }
    let results = plan.execution.map(&jobs, |&(condition, game, trial)| {
        let cost = game.config.moving_cost;
        let seed = trial_seed(plan.master_seed, condition, cost, trial);
        run_episode(game, &EpisodeConfig { max_steps: plan.max_steps, seed }, condition, Some(&signaler), trace)
            .map_err(|source| ExperimentError::Trial { condition, cost, trial, seed, source })
    });
    results.into_iter().collect()
}

/// Runs a single traced episode with an explicit seed.
pub fn run_traced(
    plan: &ExperimentPlan,
    cache: &PolicyCache,
    condition: HunterModel,
    cost: f64,
    seed: u64,
) -> Result<TrialRecord, ExperimentError> {
    let game = cache.get(cost).ok_or(ExperimentError::MissingPolicy(cost))?;
    let signaler = plan.signaler()?;
    run_episode(game, &EpisodeConfig { max_steps: plan.max_steps, seed }, condition, Some(&signaler), true)
        .map_err(|source| ExperimentError::Trial { condition, cost, trial: 0, seed, source })
}
