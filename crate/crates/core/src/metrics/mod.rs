//! Scoring from episode logs: per-game summaries, the normalized
//! performance score, tournament tables and human-baseline reliability.

pub mod report;
pub mod tournament;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::{Difficulty, EpisodeRecord, GameId};
use crate::error::{Error, Result};
use crate::games::phantom::score::weighted_final;

pub use tournament::{tournament_table, TournamentRow, TournamentTable};

/// Mean after dropping one occurrence each of the maximum and the minimum.
pub fn trimmed_mean(values: &[f64]) -> Result<f64> {
    if values.len() < 3 {
        return Err(Error::TooFewValues(values.len()));
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let sum: f64 = values.iter().sum::<f64>() - max - min;
    Ok(sum / (values.len() - 2) as f64)
}

/// Normalized performance: 0 is the random baseline, 100 the human one.
pub fn nps(model: f64, human: f64, random: f64) -> Result<f64> {
    if human == random {
        return Err(Error::DegenerateBaselines { human, random });
    }
    Ok(100.0 * (model - random) / (human - random))
}

pub const RELIABILITY_PLAYERS: usize = 5;
pub const RELIABILITY_THRESHOLD: f64 = 0.08;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reliability {
    pub std: f64,
    pub mean: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// Population spread of the per-player mean scores of the human baseline.
pub fn reliability(per_player_means: &[f64]) -> Result<Reliability> {
    if per_player_means.len() != RELIABILITY_PLAYERS {
        return Err(Error::PlayerCount {
            expected: RELIABILITY_PLAYERS,
            got: per_player_means.len(),
        });
    }
    let n = per_player_means.len() as f64;
    let mean = per_player_means.iter().sum::<f64>() / n;
    let var = per_player_means
        .iter()
        .map(|v| (v - mean).powi(2))
        .sum::<f64>()
        / n;
    let std = var.sqrt();
    let ratio = if std == 0.0 { 0.0 } else { std / mean.abs() };
    Ok(Reliability {
        std,
        mean,
        ratio,
        pass: ratio < RELIABILITY_THRESHOLD,
    })
}

fn need(raw: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    raw.get(key)
        .copied()
        .ok_or_else(|| Error::MissingMetric(key.to_string()))
}

/// The per-game number fed into the normalized score. The arena game has
/// none.
pub fn game_final_score(game: GameId, raw: &BTreeMap<String, f64>) -> Result<Option<f64>> {
    Ok(match game {
        GameId::Pathfinding => Some(1.0 / need(raw, "trimmed_steps")?),
        GameId::Echoes => Some(
            0.5 * need(raw, "mean_score")?
                + 0.25 * need(raw, "coord_acc")?
                + 0.25 * need(raw, "icon_acc")?,
        ),
        GameId::Melody => Some(need(raw, "score")?),
        GameId::Phantom => Some(weighted_final(
            need(raw, "success_rate")?,
            need(raw, "normalized")?,
        )),
        GameId::Showdown => None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub game: GameId,
    pub difficulty: Difficulty,
    pub agent_id: String,
    /// `baseline` or the intervention name.
    pub condition: String,
    pub raw: BTreeMap<String, f64>,
    pub final_score: Option<f64>,
    pub n_episodes: usize,
    pub n_aborted: usize,
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn metric(record: &EpisodeRecord, key: &str) -> Result<f64> {
    record
        .metric(key)
        .ok_or_else(|| Error::MissingMetric(key.to_string()))
}

fn series(records: &[&EpisodeRecord], key: &str) -> Result<Vec<f64>> {
    records.iter().map(|r| metric(r, key)).collect()
}

/// Per-game raw summary of a group of finished episodes.
pub fn summarize(game: GameId, records: &[&EpisodeRecord]) -> Result<BTreeMap<String, f64>> {
    if records.is_empty() {
        return Err(Error::EmptyEpisode);
    }
    let mut raw = BTreeMap::new();
    match game {
        GameId::Pathfinding => {
            let steps = series(records, "steps")?;
            raw.insert("mean_steps".into(), mean(steps.iter().copied()));
            raw.insert(
                "min_steps".into(),
                steps.iter().copied().fold(f64::INFINITY, f64::min),
            );
            raw.insert(
                "max_steps".into(),
                steps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            );
            raw.insert("mean_invalid".into(), mean(series(records, "invalid")?));
            raw.insert("trimmed_steps".into(), trimmed_mean(&steps)?);
            raw.insert(
                "success_rate".into(),
                mean(series(records, "goal_reached")?),
            );
        }
        GameId::Echoes => {
            raw.insert(
                "success_pct".into(),
                100.0 * mean(series(records, "success")?),
            );
            raw.insert("mean_score".into(), mean(series(records, "score")?));
            raw.insert("coord_acc".into(), mean(series(records, "coord_acc")?));
            raw.insert("icon_acc".into(), mean(series(records, "icon_acc")?));
            raw.insert(
                "parse_fail_pct".into(),
                100.0 * mean(series(records, "parse_failed")?),
            );
            if records
                .iter()
                .all(|r| r.metric("simplified_score").is_some())
            {
                raw.insert(
                    "simplified_score".into(),
                    mean(series(records, "simplified_score")?),
                );
            }
        }
        GameId::Melody => {
            raw.insert("score".into(), mean(series(records, "score")?));
            raw.insert(
                "completion_pct".into(),
                100.0 * mean(series(records, "completed")?),
            );
        }
        GameId::Phantom => {
            raw.insert("normalized".into(), mean(series(records, "normalized")?));
            raw.insert(
                "success_rate".into(),
                mean(series(records, "success_rate")?),
            );
        }
        GameId::Showdown => {
            raw.insert("win_pct".into(), 100.0 * mean(series(records, "win")?));
            raw.insert("kills".into(), series(records, "kills")?.iter().sum());
            raw.insert("deaths".into(), series(records, "deaths")?.iter().sum());
            raw.insert("mean_placement".into(), mean(series(records, "placement")?));
        }
    }
    Ok(raw)
}

pub fn condition_label(record: &EpisodeRecord) -> String {
    match &record.intervention {
        None => "baseline".into(),
        Some(cfg) => match cfg {
            crate::InterventionConfig::Conflict { channel } => {
                format!("conflict_{}", channel.as_str())
            }
            crate::InterventionConfig::Ablation { removed } => {
                format!("ablation_{}", removed.as_str())
            }
            crate::InterventionConfig::Noise { target, .. } => format!("noise_{}", target.as_str()),
            other => other.name().to_string(),
        },
    }
}

/// Groups records by (game, difficulty, agent, condition) and scores each
/// group from its non-aborted episodes. Output order is the group key order.
pub fn score_records(records: &[EpisodeRecord]) -> Result<Vec<ScoreReport>> {
    let mut groups: BTreeMap<(GameId, Difficulty, String, String), Vec<&EpisodeRecord>> =
        BTreeMap::new();
    for r in records {
        groups
            .entry((
                r.descriptor.game_id,
                r.descriptor.difficulty,
                r.agent_id.clone(),
                condition_label(r),
            ))
            .or_default()
            .push(r);
    }
    let mut out = Vec::new();
    for ((game, difficulty, agent_id, condition), group) in groups {
        let finished: Vec<&EpisodeRecord> =
            group.iter().copied().filter(|r| !r.is_aborted()).collect();
        let n_aborted = group.len() - finished.len();
        let (raw, final_score) = if finished.is_empty() {
            (BTreeMap::new(), None)
        } else {
            let raw = summarize(game, &finished)?;
            let score = game_final_score(game, &raw)?;
            (raw, score)
        };
        out.push(ScoreReport {
            game,
            difficulty,
            agent_id,
            condition,
            raw,
            final_score,
            n_episodes: finished.len(),
            n_aborted,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NpsEntry {
    pub game: GameId,
    pub difficulty: Difficulty,
    pub agent_id: String,
    pub final_score: f64,
    pub human: f64,
    pub random: f64,
    pub nps: f64,
}

/// Normalized scores for every baseline-condition report that has matching
/// human and random reports.
pub fn nps_table(
    reports: &[ScoreReport],
    human_id: &str,
    random_id: &str,
) -> Result<Vec<NpsEntry>> {
    let find = |game: GameId, d: Difficulty, id: &str| {
        reports
            .iter()
            .find(|r| {
                r.game == game && r.difficulty == d && r.agent_id == id && r.condition == "baseline"
            })
            .and_then(|r| r.final_score)
    };
    let mut out = Vec::new();
    for r in reports.iter().filter(|r| r.condition == "baseline") {
        let (Some(score), Some(human), Some(random)) = (
            r.final_score,
            find(r.game, r.difficulty, human_id),
            find(r.game, r.difficulty, random_id),
        ) else {
            continue;
        };
        out.push(NpsEntry {
            game: r.game,
            difficulty: r.difficulty,
            agent_id: r.agent_id.clone(),
            final_score: score,
            human,
            random,
            nps: nps(score, human, random)?,
        });
    }
    Ok(out)
}
