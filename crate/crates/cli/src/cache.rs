//! On-disk policy cache. One file per solved game, named by a hash of every
//! input that can change the solver's output.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use smithian_core::experiment::{ExperimentPlan, PolicyCache};
use smithian_core::pomdp::{Policy, SolverConfig};
use smithian_core::wumpus::{GameConfig, SolvedGame};

/// Bumped whenever the file layout or the solver's semantics change.
pub const CACHE_VERSION: u32 = 1;

#[derive(Serialize)]
struct KeyRef<'a> {
    version: u32,
    game: &'a GameConfig,
    solver: &'a SolverConfig,
}

#[derive(Serialize, Deserialize)]
struct CachedPolicy {
    version: u32,
    game: GameConfig,
    solver: SolverConfig,
    policy: Policy,
}

pub fn cache_key(game: &GameConfig, solver: &SolverConfig) -> String {
    // the execution mode is not serialized, so it never enters the key
    let text = serde_json::to_string(&KeyRef { version: CACHE_VERSION, game, solver }).expect("config is serializable");
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn cache_path(dir: &Path, game: &GameConfig, solver: &SolverConfig) -> PathBuf {
    dir.join(format!("v{CACHE_VERSION}-{}.json", cache_key(game, solver)))
}

/// Loads the cached game if a matching file exists. Files whose recorded
/// configuration disagrees with the request are ignored.
fn load(path: &Path, game: &GameConfig, solver: &SolverConfig) -> Result<Option<SolvedGame>> {
    let Ok(text) = fs::read_to_string(path) else { return Ok(None) };
    let cached: CachedPolicy = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(e) => {
            log::warn!("ignoring unreadable policy cache {}: {e}", path.display());
            return Ok(None);
        }
    };
    let recorded = SolverConfig { execution: solver.execution, ..cached.solver };
    if cached.version != CACHE_VERSION || &cached.game != game || recorded != *solver {
        log::warn!("ignoring stale policy cache {}", path.display());
        return Ok(None);
    }
    Ok(Some(SolvedGame::from_policy(game, cached.policy)?))
}

fn store(path: &Path, game: &SolvedGame, solver: &SolverConfig) -> Result<()> {
    let body = CachedPolicy { version: CACHE_VERSION, game: game.config.clone(), solver: solver.clone(), policy: game.policy.clone() };
    let text = serde_json::to_string(&body)?;
    // write then rename so a crash never leaves a truncated cache entry
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Returns the solved game for one configuration, solving and storing it
/// on a cache miss.
pub fn load_or_solve(dir: &Path, game: &GameConfig, solver: &SolverConfig) -> Result<SolvedGame> {
    let path = cache_path(dir, game, solver);
    if let Some(hit) = load(&path, game, solver)? {
        log::info!("cost {}: reusing {}", game.moving_cost, path.display());
        return Ok(hit);
    }
    log::info!("cost {}: solving", game.moving_cost);
    let (solved, sol) = SolvedGame::solve(game, solver).with_context(|| format!("solving at moving cost {}", game.moving_cost))?;
    log::info!(
        "cost {}: {} alpha vectors, {} backups, residual {:.2e}",
        game.moving_cost,
        sol.policy.vectors().len(),
        sol.backups,
        sol.residual
    );
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    store(&path, &solved, solver)?;
    Ok(solved)
}

/// Loads or solves every cost of the plan.
pub fn policies_for(dir: &Path, plan: &ExperimentPlan) -> Result<PolicyCache> {
    let solver = plan.solver_config();
    let mut cache = PolicyCache::default();
    for &cost in &plan.costs {
        cache.insert(load_or_solve(dir, &plan.game_config(cost), &solver)?);
    }
    Ok(cache)
}
