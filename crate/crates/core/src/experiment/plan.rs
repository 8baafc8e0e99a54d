use serde::{Deserialize, Serialize};

use crate::par::Execution;
use crate::pomdp::SolverConfig;
use crate::signaling::SignalerConfig;
use crate::stats::StatsSettings;
use crate::wumpus::{GameConfig, HunterModel, ShootingSemantics};

use super::ExperimentError;

/// Full description of an experiment run. Every field has a default, so a
/// plan file only needs the entries it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentPlan {
    pub conditions: Vec<HunterModel>,
    pub costs: Vec<f64>,
    pub trials_per_cell: usize,
    pub master_seed: u64,
    /// Signaler rationality; `inf` is allowed.
    #[serde(with = "crate::stats::json_f64")]
    pub alpha: f64,
    pub discount: f64,
    pub max_steps: usize,
    pub shooting: ShootingSemantics,
    pub solver: SolverConfig,
    /// Seed of the bootstrap stream; never affects trial outcomes.
    pub stats_seed: u64,
    pub resamples: usize,
    pub ci_level: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            conditions: HunterModel::ALL.to_vec(),
            costs: vec![-1.0, -3.0, -5.0, -7.0, -9.0],
            trials_per_cell: 100,
            master_seed: 2019,
            alpha: SignalerConfig::default().alpha,
            discount: GameConfig::default().discount,
            max_steps: 20,
            shooting: ShootingSemantics::Adjacent,
            solver: SolverConfig::default(),
            stats_seed: 7,
            resamples: 10_000,
            ci_level: 0.95,
            execution: Execution::default(),
        }
    }
}

/// Keys accepted by [`ExperimentPlan::apply_override`] and key=value plan files.
pub const PLAN_KEYS: [&str; 17] = [
    "conditions",
    "costs",
    "trials_per_cell",
    "master_seed",
    "alpha",
    "discount",
    "max_steps",
    "shooting",
    "stats_seed",
    "resamples",
    "ci_level",
    "solver.belief_points",
    "solver.expansion_rounds",
    "solver.max_backups",
    "solver.tolerance",
    "solver.seed",
    "seed",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ExperimentError> {
    value
        .trim()
        .parse()
        .map_err(|_| ExperimentError::InvalidPlan(format!("cannot parse '{value}' for key '{key}'")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, ExperimentError> {
    value
        .trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl ExperimentPlan {
    pub fn total_trials(&self) -> usize {
        self.conditions.len() * self.costs.len() * self.trials_per_cell
    }

    pub fn game_config(&self, cost: f64) -> GameConfig {
        GameConfig { moving_cost: cost, discount: self.discount, shooting: self.shooting, ..GameConfig::default() }
    }

    pub fn signaler(&self) -> Result<SignalerConfig, ExperimentError> {
        SignalerConfig::new(self.alpha).map_err(|e| ExperimentError::InvalidPlan(e.to_string()))
    }

    pub fn stats_settings(&self) -> StatsSettings {
        let template = self.costs.first().map_or_else(GameConfig::default, |&c| self.game_config(c));
        StatsSettings { stats_seed: self.stats_seed, resamples: self.resamples, ci_level: self.ci_level, game: template }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig { execution: self.execution, ..self.solver.clone() }
    }

    /// Sets one entry by key. `seed` is an alias for `master_seed`.
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<(), ExperimentError> {
        match key.trim() {
            "conditions" => self.conditions = parse_list(key, value)?,
            "costs" => self.costs = parse_list(key, value)?,
            "trials_per_cell" => self.trials_per_cell = parse(key, value)?,
            "master_seed" | "seed" => self.master_seed = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "discount" => self.discount = parse(key, value)?,
            "max_steps" => self.max_steps = parse(key, value)?,
            "shooting" => self.shooting = parse(key, value)?,
            "stats_seed" => self.stats_seed = parse(key, value)?,
            "resamples" => self.resamples = parse(key, value)?,
            "ci_level" => self.ci_level = parse(key, value)?,
            "solver.belief_points" => self.solver.belief_points = parse(key, value)?,
            "solver.expansion_rounds" => self.solver.expansion_rounds = parse(key, value)?,
            "solver.max_backups" => self.solver.max_backups = parse(key, value)?,
            "solver.tolerance" => self.solver.tolerance = parse(key, value)?,
            "solver.seed" => self.solver.seed = parse(key, value)?,
            other => {
                return Err(ExperimentError::UnknownKey { key: other.to_string(), valid: PLAN_KEYS.join(", ") })
            }
        }
        Ok(())
    }

    /// Parses `key=value` text. Blank lines and `#` comments are skipped.
    pub fn from_key_values(text: &str) -> Result<Self, ExperimentError> {
        let mut plan = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ExperimentError::InvalidPlan(format!("line {}: expected key=value", n + 1)))?;
            plan.apply_override(k, v)?;
        }
        plan.validate()?;
        Ok(plan)
    }

    /// Accepts a JSON plan, a JSON object carrying the plan under `"plan"`
    /// (such as a run manifest), or key=value text.
    pub fn parse_text(text: &str) -> Result<Self, ExperimentError> {
        if !text.trim_start().starts_with('{') {
            return Self::from_key_values(text);
        }
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ExperimentError::InvalidPlan(e.to_string()))?;
        let inner = match value.get("plan") {
            Some(p) if value.get("conditions").is_none() => p.clone(),
            _ => value,
        };
        let plan: Self = serde_json::from_value(inner).map_err(|e| ExperimentError::InvalidPlan(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::InvalidPlan(m));
        if self.conditions.is_empty() {
            return bad("at least one condition is required".into());
        }
        for (i, c) in self.conditions.iter().enumerate() {
            if self.conditions[..i].contains(c) {
                return bad(format!("condition {c} listed twice"));
            }
        }
        if self.costs.is_empty() {
            return bad("at least one moving cost is required".into());
        }
        for (i, c) in self.costs.iter().enumerate() {
            if !(c.is_finite() && *c < 0.0) {
                return bad(format!("moving cost {c} must be finite and negative"));
            }
            if self.costs[..i].contains(c) {
                return bad(format!("moving cost {c} listed twice"));
            }
        }
        if !(self.alpha >= 0.0) {
            return bad(format!("alpha must be non-negative, got {}", self.alpha));
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return bad(format!("discount must lie in (0, 1), got {}", self.discount));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive".into());
        }
        if self.resamples == 0 {
            return bad("resamples must be positive".into());
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return bad(format!("ci_level must lie in (0, 1), got {}", self.ci_level));
        }
        if self.solver.belief_points == 0 || self.solver.expansion_rounds == 0 {
            return bad("solver needs at least one belief point and one expansion round".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_size() {
        assert_eq!(ExperimentPlan::default().total_trials(), 1500);
    }

    #[test]
    fn key_value_file() {
        let p = ExperimentPlan::from_key_values(
            "# small\ncosts = -1, -9\ntrials_per_cell=4\nconditions=baseline,pragmatic\nshooting=ray\nsolver.belief_points=16\n",
        )
        .unwrap();
        assert_eq!(p.costs, vec![-1.0, -9.0]);
        assert_eq!(p.trials_per_cell, 4);
        assert_eq!(p.conditions, vec![HunterModel::Baseline, HunterModel::Pragmatic]);
        assert_eq!(p.shooting, ShootingSemantics::Ray);
        assert_eq!(p.solver.belief_points, 16);
    }

    #[test]
    fn unknown_key_lists_valid_keys() {
        let err = ExperimentPlan::default().apply_override("alpah", "3").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("alpah") && msg.contains("alpha") && msg.contains("solver.seed"), "{msg}");
    }

    #[test]
    fn infinite_alpha_survives_json() {
        let mut plan = ExperimentPlan::default();
        plan.apply_override("alpha", "inf").unwrap();
        let text = serde_json::to_string(&plan).unwrap();
        assert!(text.contains(r#""alpha":"inf""#));
        assert_eq!(ExperimentPlan::parse_text(&text).unwrap(), plan);
    }

    #[test]
    fn json_and_manifest_forms() {
        let plan = ExperimentPlan { trials_per_cell: 3, alpha: 2.5, ..Default::default() };
        let json = serde_json::to_string(&plan).unwrap();
        assert_eq!(ExperimentPlan::parse_text(&json).unwrap(), plan);
        let manifest = format!("{{\"version\": 1, \"plan\": {json}}}");
        assert_eq!(ExperimentPlan::parse_text(&manifest).unwrap(), plan);
        assert!(ExperimentPlan::parse_text("{\"bogus\": 1}").is_err());
    }

    #[test]
    fn rejects_bad_values() {
        for (k, v) in [("discount", "1.0"), ("costs", "-1,2"), ("alpha", "-1"), ("conditions", "")] {
            let mut p = ExperimentPlan::default();
            p.apply_override(k, v).unwrap();
            assert!(p.validate().is_err(), "{k}={v}");
        }
    }
}
