//! Plain-text table emitters. Machine-readable output is the serde form of
//! the same structs.

use super::{NpsEntry, ScoreReport, TournamentTable};
use crate::engine::GameId;

/// Left-aligned first column, right-aligned numbers, two-space gutters.
pub fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (i, c) in r.iter().enumerate().take(cols) {
            width[i] = width[i].max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i == 0 {
                    format!("{c:<w$}", w = width[i])
                } else {
                    format!("{c:>w$}", w = width[i])
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = vec![line(header.to_vec())];
    out.push(
        width
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .join("  "),
    );
    for r in rows {
        out.push(line(r.iter().map(String::as_str).collect()));
    }
    out.join("\n") + "\n"
}

fn columns(game: GameId) -> &'static [(&'static str, &'static str)] {
    match game {
        GameId::Pathfinding => &[
            ("Mean Steps", "mean_steps"),
            ("Min", "min_steps"),
            ("Max", "max_steps"),
            ("Invalid", "mean_invalid"),
            ("Trimmed", "trimmed_steps"),
        ],
        GameId::Echoes => &[
            ("Succ.(%)", "success_pct"),
            ("M.Score", "mean_score"),
            ("Coord.", "coord_acc"),
            ("Icon", "icon_acc"),
            ("ParseF(%)", "parse_fail_pct"),
        ],
        GameId::Melody => &[
            ("Score", "score"),
            ("Completion Rate (%)", "completion_pct"),
        ],
        GameId::Phantom => &[("Score", "normalized"), ("Success Rate", "success_rate")],
        GameId::Showdown => &[
            ("Win (%)", "win_pct"),
            ("Kills", "kills"),
            ("Deaths", "deaths"),
            ("Placement", "mean_placement"),
        ],
    }
}

fn num(v: Option<f64>) -> String {
    match v {
        Some(v) if v.fract() == 0.0 && v.abs() < 1e15 => format!("{v:.0}"),
        Some(v) => format!("{v:.3}"),
        None => "-".into(),
    }
}

/// One table per game, rows per (agent, difficulty, condition).
pub fn score_tables(reports: &[ScoreReport]) -> String {
    let mut out = String::new();
    for game in GameId::ALL {
        let rows: Vec<&ScoreReport> = reports.iter().filter(|r| r.game == game).collect();
        if rows.is_empty() {
            continue;
        }
        let cols = columns(game);
        let mut header = vec!["Agent", "Difficulty", "Condition"];
        header.extend(cols.iter().map(|(h, _)| *h));
        header.extend(["Final", "N", "Aborted"]);
        let body: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                let mut cells = vec![
                    r.agent_id.clone(),
                    r.difficulty.to_string(),
                    r.condition.clone(),
                ];
                cells.extend(cols.iter().map(|(_, k)| num(r.raw.get(*k).copied())));
                cells.push(num(r.final_score));
                cells.push(r.n_episodes.to_string());
                cells.push(r.n_aborted.to_string());
                cells
            })
            .collect();
        out.push_str(&format!("== {game} ==\n"));
        out.push_str(&aligned(&header, &body));
        out.push('\n');
    }
    out
}

pub fn nps_text(entries: &[NpsEntry]) -> String {
    let body: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            vec![
                e.agent_id.clone(),
                e.game.to_string(),
                e.difficulty.to_string(),
                format!("{:.4}", e.final_score),
                format!("{:.4}", e.human),
                format!("{:.4}", e.random),
                format!("{:.1}", e.nps),
            ]
        })
        .collect();
    aligned(
        &[
            "Agent",
            "Game",
            "Difficulty",
            "Final",
            "Human",
            "Random",
            "NPS",
        ],
        &body,
    )
}

pub fn tournament_text(table: &TournamentTable) -> String {
    let body: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.agent_id.clone(),
                r.games.to_string(),
                r.wins.to_string(),
                r.win_rate_text(),
                r.kills.to_string(),
                r.deaths.to_string(),
                r.kd_text(),
            ]
        })
        .collect();
    let mut out = aligned(
        &[
            "Agent",
            "Games Played",
            "Wins",
            "Win Rate (%)",
            "Kills",
            "Deaths",
            "K/D Ratio",
        ],
        &body,
    );
    if table.rows.iter().any(|r| r.kd_flagged) {
        out.push_str("* no deaths; K/D shows kills\n");
    }
    out
}
