use crate::wumpus::HunterModel;

/// One SplitMix64 output step applied to `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Episode seed of one trial.
///
/// `h = master; for k in [condition, cost, trial] { h = splitmix64(h ^ splitmix64(k)) }`
/// where `condition` is the canonical index of the hunter model
/// (baseline 0, literal_double 1, pragmatic 2) and `cost` is the IEEE-754
/// bit pattern of the moving cost. A cell's seeds therefore depend only on
/// its identity, not on its position in the plan.
pub fn trial_seed(master: u64, condition: HunterModel, cost: f64, trial: usize) -> u64 {
    let cond = HunterModel::ALL.iter().position(|&c| c == condition).expect("condition is canonical") as u64;
    [cond, cost.to_bits(), trial as u64].into_iter().fold(master, |h, k| splitmix64(h ^ splitmix64(k)))
}
