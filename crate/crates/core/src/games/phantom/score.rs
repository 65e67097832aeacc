use serde::{Deserialize, Serialize};

use super::map::{TacticalMap, UnitKind};
use crate::games::grid::Pos;

pub const EFFICIENCY_FRACTION: f64 = 0.3;
pub const ROUND_BONUS_WEIGHT: f64 = 0.5;
pub const AUX_CAP_FRACTION: f64 = 0.05;
pub const EXPLORATION_OVERHEAD: u32 = 1;
pub const ROUNDS_PER_HIDDEN: u32 = 2;

/// Greedy accumulated assignment of objectives to units.
///
/// Repeatedly commits the (unit, objective) pair whose completion time,
/// counted from the unit's last assigned objective, is smallest. Returns,
/// per unit, its ordered objective indices and its accumulated path length.
pub fn greedy_assignment(
    map: &TacticalMap,
    starts: &[(Pos, UnitKind)],
    objectives: &[usize],
) -> Vec<(Vec<usize>, u32)> {
    let mut plan: Vec<(Vec<usize>, u32)> = vec![(Vec::new(), 0); starts.len()];
    let mut at: Vec<Pos> = starts.iter().map(|(p, _)| *p).collect();
    let mut left: Vec<usize> = objectives.to_vec();
    while !left.is_empty() {
        let mut best: Option<(f64, usize, usize, u32)> = None;
        for (u, (_, kind)) in starts.iter().enumerate() {
            for (k, &o) in left.iter().enumerate() {
                let Some(len) = map.path_length(at[u], map.objectives[o].pos) else {
                    continue;
                };
                let total = plan[u].1 + len;
                let time = total as f64 / kind.speed() as f64;
                if best.is_none_or(|(t, ..)| time < t) {
                    best = Some((time, u, k, total));
                }
            }
        }
        let Some((_, u, k, total)) = best else {
            break;
        };
        let o = left.remove(k);
        plan[u].0.push(o);
        plan[u].1 = total;
        at[u] = map.objectives[o].pos;
    }
    plan
}

/// Heuristic minimum rounds: slowest unit's travel under the greedy plan,
/// plus discovery time for hidden objectives (halved with a scout) and a
/// fixed exploration overhead.
pub fn estimate_target_rounds(map: &TacticalMap) -> u32 {
    let starts: Vec<(Pos, UnitKind)> = map.units.iter().map(|u| (u.pos, u.kind)).collect();
    let main: Vec<usize> = (0..map.objectives.len())
        .filter(|&i| !map.objectives[i].bonus)
        .collect();
    let plan = greedy_assignment(map, &starts, &main);
    let travel = plan
        .iter()
        .zip(&starts)
        .map(|((_, len), (_, kind))| len.div_ceil(kind.speed()))
        .max()
        .unwrap_or(0);
    let hidden = main.iter().filter(|&&i| map.objectives[i].hidden).count() as u32;
    let mut discovery = ROUNDS_PER_HIDDEN * hidden;
    if map.units.iter().any(|u| u.kind == UnitKind::Scout) {
        discovery = discovery.div_ceil(2);
    }
    travel + discovery + EXPLORATION_OVERHEAD
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreInputs {
    pub captured_points: f64,
    pub aux_points: f64,
    pub base_points: f64,
    pub dynamic_bonus: f64,
    pub target_rounds: u32,
    pub max_rounds: u32,
    pub rounds_used: u32,
    /// Rounds in which every issued command was valid.
    pub valid_rounds: u32,
    pub completed: u32,
    pub total: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhantomScore {
    pub captured_points: f64,
    pub aux_points: f64,
    pub base_points: f64,
    pub score_ceiling: f64,
    pub round_bonus: f64,
    pub efficiency_bonus: f64,
    pub dynamic_bonus: f64,
    pub target_rounds: u32,
    pub max_rounds: u32,
    pub rounds_used: u32,
    pub success_rate: f64,
    pub normalized: f64,
}

pub fn round_bonus(base_points: f64, target_rounds: u32, max_rounds: u32) -> f64 {
    base_points * (1.0 - target_rounds as f64 / max_rounds as f64) * ROUND_BONUS_WEIGHT
}

pub fn score_ceiling(
    base_points: f64,
    target_rounds: u32,
    max_rounds: u32,
    dynamic_bonus: f64,
) -> f64 {
    base_points
        + round_bonus(base_points, target_rounds, max_rounds)
        + base_points * EFFICIENCY_FRACTION
        + dynamic_bonus
}

/// Scores a mission. The normalized score credits captured points, the
/// capped auxiliary score, the round bonus actually earned (full completion
/// only, measured against the slower of `rounds_used` and `target_rounds`), and the
/// efficiency bonus scaled by valid-round share and completion share.
pub fn phantom_score(inputs: &ScoreInputs) -> PhantomScore {
    let max_rounds = inputs.max_rounds.max(1);
    let max_round_bonus = round_bonus(inputs.base_points, inputs.target_rounds, max_rounds);
    let efficiency_bonus = inputs.base_points * EFFICIENCY_FRACTION;
    let score_ceiling = score_ceiling(
        inputs.base_points,
        inputs.target_rounds,
        max_rounds,
        inputs.dynamic_bonus,
    );
    let success_rate = if inputs.total == 0 {
        0.0
    } else {
        inputs.completed as f64 / inputs.total as f64
    };
    let all_done = inputs.total > 0 && inputs.completed == inputs.total;
    let earned_rounds = if all_done {
        let used = inputs.rounds_used.max(inputs.target_rounds).min(max_rounds);
        round_bonus(inputs.base_points, used, max_rounds).max(0.0)
    } else {
        0.0
    };
    let valid_share = if inputs.rounds_used == 0 {
        0.0
    } else {
        (inputs.valid_rounds as f64 / inputs.rounds_used as f64).clamp(0.0, 1.0)
    };
    let earned_efficiency = efficiency_bonus * valid_share * success_rate;
    let aux = inputs
        .aux_points
        .clamp(0.0, AUX_CAP_FRACTION * inputs.base_points.max(0.0));
    let credited = inputs.captured_points + aux + earned_rounds + earned_efficiency;
    let normalized = if score_ceiling > 0.0 && credited.is_finite() {
        (credited / score_ceiling * 100.0).clamp(0.0, 100.0)
    } else {
        0.0
    };
    PhantomScore {
        captured_points: inputs.captured_points,
        aux_points: inputs.aux_points,
        base_points: inputs.base_points,
        score_ceiling,
        round_bonus: max_round_bonus,
        efficiency_bonus,
        dynamic_bonus: inputs.dynamic_bonus,
        target_rounds: inputs.target_rounds,
        max_rounds,
        rounds_used: inputs.rounds_used,
        success_rate,
        normalized,
    }
}

/// Final score fed to normalization: equal parts success percentage and
/// normalized score.
pub fn weighted_final(success_rate: f64, normalized: f64) -> f64 {
    0.5 * (success_rate * 100.0) + 0.5 * normalized
}
