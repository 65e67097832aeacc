//! Four-seat arena tournaments with resumable match logs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Mutex;

use omniplay::agents::AgentConnector;
use omniplay::games::showdown::tournament::{replay_match, run_match, seating_plan, MatchRecord};
use omniplay::games::showdown::PLAYERS;
use omniplay::metrics::{report, tournament_table, TournamentTable};
use omniplay::GameId;
use rayon::prelude::*;

use crate::config::TournamentConfig;
use crate::error::{HarnessError, Result};
use crate::seeds::SeedManifest;
use crate::store;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduledMatch {
    pub game_index: usize,
    pub seed: u64,
    pub agents: [usize; PLAYERS],
}

pub fn schedule(cfg: &TournamentConfig) -> Result<Vec<ScheduledMatch>> {
    let manifest = match &cfg.seeds {
        Some(p) => SeedManifest::load(p)?,
        None => SeedManifest::builtin(GameId::Showdown),
    };
    if manifest.game != GameId::Showdown {
        return Err(HarnessError::Config(
            "tournament needs the showdown seed manifest".into(),
        ));
    }
    let seeds = manifest.take(cfg.games)?;
    let seating = seating_plan(cfg.seating_seed, cfg.agents.len(), cfg.games)?;
    Ok(seeds
        .iter()
        .zip(seating)
        .enumerate()
        .map(|(game_index, (&seed, agents))| ScheduledMatch {
            game_index,
            seed,
            agents,
        })
        .collect())
}

pub fn describe_schedule(cfg: &TournamentConfig, schedule: &[ScheduledMatch]) -> String {
    let ids = cfg.agent_ids();
    let mut out = format!(
        "{} games | {} agents | tick cap {} | seating seed {} | out {}\n",
        schedule.len(),
        ids.len(),
        cfg.tick_cap,
        cfg.seating_seed,
        cfg.out.display()
    );
    for m in schedule {
        let seats: Vec<&str> = m.agents.iter().map(|&a| ids[a].as_str()).collect();
        let _ = writeln!(
            out,
            "  #{:03} seed {} seats {}",
            m.game_index,
            m.seed,
            seats.join(", ")
        );
    }
    out
}

fn check_resumed(
    rec: &MatchRecord,
    schedule: &[ScheduledMatch],
    ids: &[String],
    tick_cap: u32,
) -> Result<()> {
    let mismatch = |why: String| {
        Err(HarnessError::ResumeMismatch(format!(
            "game {}: {why}",
            rec.game_index
        )))
    };
    let Some(m) = schedule.get(rec.game_index) else {
        return mismatch("index beyond the schedule".into());
    };
    let expected: Vec<String> = m.agents.iter().map(|&a| ids[a].clone()).collect();
    if rec.seed != m.seed || rec.agents != expected || rec.tick_cap != tick_cap {
        return mismatch("seed, seating or tick cap differ".into());
    }
    if replay_match(rec)? != rec.result {
        return mismatch("replay disagrees with the logged result".into());
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct TournamentSummary {
    pub matches: Vec<MatchRecord>,
    pub resumed: usize,
    pub played: usize,
    pub table: TournamentTable,
    pub report: String,
}

/// Plays every scheduled match not already in `matches.jsonl`, appending
/// each as it finishes, then rewrites the log in game order and writes the
/// standings. `force` discards an existing log.
pub fn run(cfg: &TournamentConfig, force: bool) -> Result<TournamentSummary> {
    let schedule = schedule(cfg)?;
    let ids = cfg.agent_ids();
    std::fs::create_dir_all(&cfg.out).map_err(crate::error::io_err(&cfg.out))?;
    let log = cfg.out.join(store::MATCHES_FILE);
    if force && log.exists() {
        store::prepare_output(&cfg.out, true)?;
    }
    let mut done: BTreeMap<usize, MatchRecord> = BTreeMap::new();
    if log.exists() {
        for rec in store::read_jsonl::<MatchRecord>(&log)? {
            check_resumed(&rec, &schedule, &ids, cfg.tick_cap)?;
            done.insert(rec.game_index, rec);
        }
    }
    let resumed = done.len();
    store::write_text(&cfg.out.join("tournament.toml"), &cfg.to_toml())?;
    let pending: Vec<&ScheduledMatch> = schedule
        .iter()
        .filter(|m| !done.contains_key(&m.game_index))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.concurrency)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let appender = Mutex::new(());
    let fresh: Vec<MatchRecord> = pool.install(|| {
        pending
            .par_iter()
            .map(|m| {
                let mut connectors: Vec<Box<dyn AgentConnector>> = m
                    .agents
                    .iter()
                    .map(|&a| cfg.agents[a].connector(GameId::Showdown))
                    .collect::<Result<_>>()?;
                let [a, b, c, d] = &mut connectors[..] else {
                    unreachable!("four seats")
                };
                let mut seats: [&mut dyn AgentConnector; PLAYERS] =
                    [a.as_mut(), b.as_mut(), c.as_mut(), d.as_mut()];
                let rec = run_match(m.game_index, m.seed, cfg.tick_cap, &mut seats)?;
                let _guard = appender.lock().unwrap_or_else(|p| p.into_inner());
                store::append_jsonl(&log, &rec)?;
                Ok(rec)
            })
            .collect::<Result<_>>()
    })?;
    let played = fresh.len();
    done.extend(fresh.into_iter().map(|r| (r.game_index, r)));
    let matches: Vec<MatchRecord> = done.into_values().collect();
    store::write_jsonl(&log, &matches)?;
    let results: Vec<_> = matches.iter().map(|m| m.result.clone()).collect();
    let table = tournament_table(&results);
    let text = report::tournament_text(&table);
    store::write_text(&cfg.out.join("tournament.txt"), &text)?;
    store::write_json(&cfg.out.join("tournament.json"), &table)?;
    Ok(TournamentSummary {
        matches,
        resumed,
        played,
        table,
        report: text,
    })
}
