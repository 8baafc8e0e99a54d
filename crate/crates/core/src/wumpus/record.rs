//! CSV forms of [`TrialRecord`] (one row per episode) and of the per-step
//! trace (one row per step, beliefs as semicolon-joined decimals).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::episode::{HunterModel, TrialRecord};
use super::game::{Tile, WumpusAction};
use super::WumpusError;

pub const TRIAL_COLUMNS: [&str; 12] = [
    "condition",
    "moving_cost",
    "seed",
    "steps",
    "shot_action",
    "shot_tile",
    "wumpus_pos",
    "hit",
    "total_reward",
    "cap_hit",
    "n_points",
    "n_stench",
];

pub fn format_tile(t: Tile) -> String {
    format!("({},{})", t.0, t.1)
}

pub fn parse_tile(s: &str) -> Result<Tile, WumpusError> {
    let bad = || WumpusError::InvalidRecord(format!("malformed tile '{s}'"));
    let inner = s.trim().strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
    let (x, y) = inner.split_once(',').ok_or_else(bad)?;
    Ok((x.trim().parse().map_err(|_| bad())?, y.trim().parse().map_err(|_| bad())?))
}

#[derive(Debug, Serialize, Deserialize)]
struct TrialRow {
    condition: String,
    moving_cost: f64,
    seed: u64,
    steps: usize,
    shot_action: String,
    shot_tile: String,
    wumpus_pos: String,
    hit: bool,
    total_reward: f64,
    cap_hit: bool,
    n_points: usize,
    n_stench: usize,
}

impl From<&TrialRecord> for TrialRow {
    fn from(r: &TrialRecord) -> Self {
        Self {
            condition: r.condition.name().to_string(),
            moving_cost: r.moving_cost,
            seed: r.seed,
            steps: r.steps,
            shot_action: r.shot_action.map(|a| a.name().to_string()).unwrap_or_default(),
            shot_tile: r.shot_tile.map(format_tile).unwrap_or_default(),
            wumpus_pos: format_tile(r.wumpus_pos),
            hit: r.hit,
            total_reward: r.total_reward,
            cap_hit: r.cap_hit,
            n_points: r.n_points,
            n_stench: r.n_stench,
        }
    }
}

impl TryFrom<TrialRow> for TrialRecord {
    type Error = WumpusError;

    fn try_from(row: TrialRow) -> Result<Self, Self::Error> {
        let shot_action = if row.shot_action.is_empty() {
            None
        } else {
            Some(
                WumpusAction::ALL
                    .into_iter()
                    .find(|a| a.name() == row.shot_action)
                    .ok_or_else(|| WumpusError::InvalidRecord(format!("unknown action '{}'", row.shot_action)))?,
            )
        };
        Ok(TrialRecord {
            condition: row.condition.parse().map_err(WumpusError::InvalidRecord)?,
            moving_cost: row.moving_cost,
            seed: row.seed,
            steps: row.steps,
            shot_action,
            shot_tile: if row.shot_tile.is_empty() { None } else { Some(parse_tile(&row.shot_tile)?) },
            wumpus_pos: parse_tile(&row.wumpus_pos)?,
            hit: row.hit,
            total_reward: row.total_reward,
            cap_hit: row.cap_hit,
            n_points: row.n_points,
            n_stench: row.n_stench,
            trace: Vec::new(),
        })
    }
}

fn csv_err(e: csv::Error) -> WumpusError {
    WumpusError::InvalidRecord(e.to_string())
}

pub fn write_trials<W: Write>(out: W, records: &[TrialRecord]) -> Result<(), WumpusError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(TrialRow::from(r)).map_err(csv_err)?;
    }
    if records.is_empty() {
        w.write_record(TRIAL_COLUMNS).map_err(csv_err)?;
    }
    w.flush().map_err(|e| WumpusError::InvalidRecord(e.to_string()))
}

pub fn read_trials<R: Read>(input: R) -> Result<Vec<TrialRecord>, WumpusError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.iter().ne(TRIAL_COLUMNS) {
        return Err(WumpusError::InvalidRecord(format!(
            "unexpected header {:?}, expected {:?}",
            headers.iter().collect::<Vec<_>>(),
            TRIAL_COLUMNS
        )));
    }
    rdr.deserialize::<TrialRow>()
        .map(|row| row.map_err(csv_err).and_then(TrialRecord::try_from))
        .collect()
}

#[derive(Debug, Serialize)]
struct TraceRow<'a> {
    condition: &'a str,
    moving_cost: f64,
    seed: u64,
    step: usize,
    hunter_pos: String,
    action: &'a str,
    arrived: String,
    observation: &'a str,
    reward: f64,
    stench: bool,
    svi_point: Option<f64>,
    svi_no_point: Option<f64>,
    p_point: Option<f64>,
    signal: &'a str,
    belief_before: String,
    belief_after: String,
}

/// Writes the per-step trace of every record (records must have been run
/// with tracing enabled).
pub fn write_trace<W: Write>(out: W, records: &[TrialRecord]) -> Result<(), WumpusError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        for st in &r.trace {
            let ev = st.signal.as_ref();
            w.serialize(TraceRow {
                condition: r.condition.name(),
                moving_cost: r.moving_cost,
                seed: r.seed,
                step: st.step,
                hunter_pos: format_tile(st.hunter_pos),
                action: st.action.name(),
                arrived: st.arrived.map(format_tile).unwrap_or_default(),
                observation: st.observation.map(|o| o.name()).unwrap_or(""),
                reward: st.reward,
                stench: st.observation == Some(super::game::WumpusObservation::Stench),
                svi_point: ev.map(|e| e.distribution.svi[0]),
                svi_no_point: ev.map(|e| e.distribution.svi[1]),
                p_point: ev.map(|e| e.distribution.probs[0]),
                signal: ev.map(|e| e.signal.name()).unwrap_or(""),
                belief_before: ev.map(|e| e.belief_before.to_semicolon_string()).unwrap_or_default(),
                belief_after: ev.map(|e| e.belief_after.to_semicolon_string()).unwrap_or_default(),
            })
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| WumpusError::InvalidRecord(e.to_string()))
}

/// Parses a condition column value.
pub fn parse_condition(s: &str) -> Result<HunterModel, WumpusError> {
    s.parse().map_err(WumpusError::InvalidRecord)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tile_format() {
        assert_eq!(format_tile((0, 2)), "(0,2)");
        assert_eq!(parse_tile("(1,0)").unwrap(), (1, 0));
        assert!(parse_tile("1,0").is_err());
    }

    fn arb_record() -> impl Strategy<Value = TrialRecord> {
        (0usize..3, -20i32..0, any::<u64>(), 1usize..21, proptest::option::of(0usize..4), -300i32..100, any::<bool>(), 0usize..10)
            .prop_map(|(c, cost, seed, steps, shot, reward, cap, pts)| TrialRecord {
                condition: HunterModel::ALL[c],
                moving_cost: cost as f64,
                seed,
                steps,
                shot_action: shot.map(|i| WumpusAction::ALL[i]),
                shot_tile: shot.map(|_| (0, 2)),
                wumpus_pos: (1, 1),
                hit: shot.is_some() && !cap,
                total_reward: reward as f64 + 0.25,
                cap_hit: cap,
                n_points: pts,
                n_stench: pts * 2,
                trace: Vec::new(),
            })
    }

    proptest! {
        #[test]
        fn trials_csv_round_trips(records in proptest::collection::vec(arb_record(), 0..20)) {
            let mut buf = Vec::new();
            write_trials(&mut buf, &records).unwrap();
            let back = read_trials(buf.as_slice()).unwrap();
            prop_assert_eq!(back, records);
        }
    }
}
