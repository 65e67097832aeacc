use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::games::showdown::tournament::MatchResult;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TournamentRow {
    pub agent_id: String,
    pub games: u32,
    pub wins: u32,
    /// Percent.
    pub win_rate: f64,
    pub kills: u32,
    pub deaths: u32,
    /// Kills per death; equals kills when the agent never died.
    pub kd: f64,
    pub kd_flagged: bool,
}

impl TournamentRow {
    pub fn win_rate_text(&self) -> String {
        format!("{:.2}", self.win_rate)
    }

    pub fn kd_text(&self) -> String {
        if self.kd_flagged {
            format!("{:.2}*", self.kd)
        } else {
            format!("{:.2}", self.kd)
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TournamentTable {
    pub rows: Vec<TournamentRow>,
    pub matches: u32,
    pub decided: u32,
}

/// Per-agent aggregates over a set of matches, ordered by win rate then id.
pub fn tournament_table(results: &[MatchResult]) -> TournamentTable {
    let mut acc: BTreeMap<&str, (u32, u32, u32, u32)> = BTreeMap::new();
    for m in results {
        for p in &m.players {
            let e = acc.entry(&p.agent_id).or_default();
            e.0 += 1;
            e.1 += u32::from(m.winner == Some(p.seat));
            e.2 += p.kills;
            e.3 += p.deaths;
        }
    }
    let mut rows: Vec<TournamentRow> = acc
        .into_iter()
        .map(|(id, (games, wins, kills, deaths))| TournamentRow {
            agent_id: id.to_string(),
            games,
            wins,
            win_rate: 100.0 * wins as f64 / games as f64,
            kills,
            deaths,
            kd: if deaths == 0 {
                kills as f64
            } else {
                kills as f64 / deaths as f64
            },
            kd_flagged: deaths == 0,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.win_rate
            .total_cmp(&a.win_rate)
            .then_with(|| a.agent_id.cmp(&b.agent_id))
    });
    TournamentTable {
        rows,
        matches: results.len() as u32,
        decided: results.iter().filter(|m| m.winner.is_some()).count() as u32,
    }
}
