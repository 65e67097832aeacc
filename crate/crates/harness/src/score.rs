//! Recomputing reports from episode and match logs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use omniplay::games::showdown::tournament::MatchRecord;
use omniplay::metrics::{
    game_final_score, nps_table, reliability, report, score_records, summarize, tournament_table,
    NpsEntry, Reliability, ScoreReport, TournamentTable, RELIABILITY_PLAYERS,
};
use omniplay::{Difficulty, EpisodeRecord, GameId};
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::store;

pub const HUMAN_ID: &str = "human";
pub const RANDOM_ID: &str = "random";
const HUMAN_PREFIX: &str = "human/";

/// Participant id of a human-played record.
pub fn participant(record: &EpisodeRecord) -> Option<&str> {
    record.agent_id.strip_prefix(HUMAN_PREFIX)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReliabilityEntry {
    pub game: GameId,
    pub difficulty: Difficulty,
    pub participants: Vec<String>,
    pub per_participant: Vec<f64>,
    #[serde(flatten)]
    pub stats: Reliability,
}

#[derive(Clone, Debug)]
pub struct ScoreOutputs {
    pub reports: Vec<ScoreReport>,
    pub nps: Vec<NpsEntry>,
    pub reliability: Vec<ReliabilityEntry>,
    pub tournament: Option<TournamentTable>,
}

pub fn load_records(inputs: &[PathBuf]) -> Result<Vec<EpisodeRecord>> {
    let mut records = Vec::new();
    for input in inputs {
        for file in store::episode_log_files(input)? {
            records.extend(store::read_jsonl::<EpisodeRecord>(&file)?);
        }
    }
    Ok(records)
}

pub fn load_matches(inputs: &[PathBuf]) -> Result<Vec<MatchRecord>> {
    let mut out = Vec::new();
    for input in inputs {
        for file in store::match_log_files(input)? {
            out.extend(store::read_jsonl::<MatchRecord>(&file)?);
        }
    }
    Ok(out)
}

/// Final score per participant for every (game, difficulty) played by
/// exactly the panel size of participants.
pub fn human_reliability(records: &[EpisodeRecord]) -> Result<Vec<ReliabilityEntry>> {
    let mut groups: BTreeMap<(GameId, Difficulty), BTreeMap<&str, Vec<&EpisodeRecord>>> =
        BTreeMap::new();
    for r in records
        .iter()
        .filter(|r| r.intervention.is_none() && !r.is_aborted())
    {
        if let Some(p) = participant(r) {
            groups
                .entry((r.descriptor.game_id, r.descriptor.difficulty))
                .or_default()
                .entry(p)
                .or_default()
                .push(r);
        }
    }
    let mut out = Vec::new();
    for ((game, difficulty), by_person) in groups {
        if by_person.len() != RELIABILITY_PLAYERS {
            continue;
        }
        let mut scores = Vec::new();
        for recs in by_person.values() {
            match game_final_score(game, &summarize(game, recs)?)? {
                Some(s) => scores.push(s),
                None => break,
            }
        }
        if scores.len() != RELIABILITY_PLAYERS {
            continue;
        }
        out.push(ReliabilityEntry {
            game,
            difficulty,
            participants: by_person.keys().map(|s| s.to_string()).collect(),
            stats: reliability(&scores)?,
            per_participant: scores,
        });
    }
    Ok(out)
}

fn reliability_text(entries: &[ReliabilityEntry]) -> String {
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            vec![
                e.game.to_string(),
                e.difficulty.to_string(),
                format!("{:.4}", e.stats.mean),
                format!("{:.4}", e.stats.std),
                format!("{:.4}", e.stats.ratio),
                if e.stats.pass { "pass" } else { "fail" }.to_string(),
            ]
        })
        .collect();
    report::aligned(
        &["game", "difficulty", "mean", "std", "std/mean", "verdict"],
        &rows,
    )
}

/// Scores everything under `inputs` and writes reports into `out`. Human
/// records count under the single id `human`.
pub fn score(inputs: &[PathBuf], out: &Path) -> Result<ScoreOutputs> {
    let records = load_records(inputs)?;
    let matches = load_matches(inputs)?;
    if records.is_empty() && matches.is_empty() {
        let names: Vec<String> = inputs.iter().map(|p| p.display().to_string()).collect();
        return Err(HarnessError::NoLogs(names.join(", ")));
    }
    std::fs::create_dir_all(out).map_err(crate::error::io_err(out))?;
    let reliability = human_reliability(&records)?;
    let canonical: Vec<EpisodeRecord> = records
        .into_iter()
        .map(|mut r| {
            if participant(&r).is_some() {
                r.agent_id = HUMAN_ID.to_string();
            }
            r
        })
        .collect();
    let reports = score_records(&canonical)?;
    let nps = nps_table(&reports, HUMAN_ID, RANDOM_ID)?;
    if !reports.is_empty() {
        store::write_text(&out.join("scores.txt"), &report::score_tables(&reports))?;
        store::write_json(&out.join("scores.json"), &reports)?;
        store::write_text(&out.join("nps.txt"), &report::nps_text(&nps))?;
        store::write_json(&out.join("nps.json"), &nps)?;
    }
    if !reliability.is_empty() {
        store::write_text(
            &out.join("reliability.txt"),
            &reliability_text(&reliability),
        )?;
        store::write_json(&out.join("reliability.json"), &reliability)?;
    }
    let tournament = (!matches.is_empty()).then(|| {
        let results: Vec<_> = matches.iter().map(|m| m.result.clone()).collect();
        tournament_table(&results)
    });
    if let Some(table) = &tournament {
        store::write_text(&out.join("tournament.txt"), &report::tournament_text(table))?;
        store::write_json(&out.join("tournament.json"), table)?;
    }
    Ok(ScoreOutputs {
        reports,
        nps,
        reliability,
        tournament,
    })
}
