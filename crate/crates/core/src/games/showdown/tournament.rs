//! Multi-agent matches: every seat is an external agent.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::arena::{Arena, PLAYERS};
use super::{parse_arena_action, seat_observation, ArenaAction, Truth};
use crate::agents::{AgentConnector, AgentRequest, HistoryEntry};
use crate::engine::{ActionSpace, Difficulty, EnvDescriptor, GameId, Privileged, HISTORY_WINDOW};
use crate::error::{Error, Result};
use crate::rng::keyed;

pub const MATCH_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerResult {
    pub seat: usize,
    pub agent_id: String,
    pub kills: u32,
    pub deaths: u32,
    pub placement: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub winner: Option<usize>,
    pub ticks: u32,
    pub players: Vec<PlayerResult>,
}

impl MatchResult {
    pub fn from_arena(arena: &Arena, agents: &[String]) -> Self {
        let placements = arena.placements();
        Self {
            winner: arena.winner(),
            ticks: arena.tick,
            players: arena
                .players
                .iter()
                .map(|p| PlayerResult {
                    seat: p.seat,
                    agent_id: agents[p.seat].clone(),
                    kills: p.kills,
                    deaths: p.deaths,
                    placement: placements[p.seat],
                })
                .collect(),
        }
    }

    pub fn winner_id(&self) -> Option<&str> {
        self.winner.map(|s| self.players[s].agent_id.as_str())
    }
}

/// One logged match; enough to re-simulate it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub schema_version: u32,
    pub game_index: usize,
    pub seed: u64,
    pub tick_cap: u32,
    pub agents: Vec<String>,
    pub actions: Vec<[ArenaAction; PLAYERS]>,
    pub invalid: [u32; PLAYERS],
    pub transport_errors: [u32; PLAYERS],
    pub result: MatchResult,
}

/// Seat assignments for `games` matches among `agents` entrants: all
/// four-agent subsets in a seeded order, cycled, with seats rotated on each
/// pass.
pub fn seating_plan(seed: u64, agents: usize, games: usize) -> Result<Vec<[usize; PLAYERS]>> {
    if agents < PLAYERS {
        return Err(Error::TooFewAgents(agents));
    }
    let mut combos = Vec::new();
    for a in 0..agents {
        for b in a + 1..agents {
            for c in b + 1..agents {
                for d in c + 1..agents {
                    combos.push([a, b, c, d]);
                }
            }
        }
    }
    combos.shuffle(&mut keyed(seed, "seating", 0));
    Ok((0..games)
        .map(|g| {
            let mut seats = combos[g % combos.len()];
            seats.rotate_left((g / combos.len()) % PLAYERS);
            seats
        })
        .collect())
}

pub fn match_descriptor(seed: u64, tick_cap: u32) -> Result<EnvDescriptor> {
    EnvDescriptor::new(GameId::Showdown, Difficulty::None, seed)?.with_step_cap(tick_cap)
}

/// Plays one match. Eliminated seats are not queried; a seat whose agent
/// fails or replies unparseably waits for that tick.
pub fn run_match(
    game_index: usize,
    seed: u64,
    tick_cap: u32,
    seats: &mut [&mut dyn AgentConnector; PLAYERS],
) -> Result<MatchRecord> {
    let descriptor = match_descriptor(seed, tick_cap)?;
    let agents: Vec<String> = seats.iter().map(|a| a.agent_id().to_string()).collect();
    for (seat, agent) in seats.iter_mut().enumerate() {
        agent.begin_episode(&descriptor, seat);
    }
    let action_space = ActionSpace::Discrete(
        ArenaAction::ALL
            .iter()
            .map(|a| a.as_str().to_string())
            .collect(),
    );
    let system = crate::render::prompt::SHOWDOWN_SYSTEM;
    let mut arena = Arena::generate(seed);
    let mut histories: Vec<Vec<HistoryEntry>> = vec![Vec::new(); PLAYERS];
    let mut actions_log = Vec::new();
    let mut invalid = [0; PLAYERS];
    let mut errors = [0; PLAYERS];
    while !arena.is_over() && arena.tick < tick_cap {
        let mut actions = [ArenaAction::Wait; PLAYERS];
        for seat in 0..PLAYERS {
            if !arena.players[seat].alive {
                continue;
            }
            let mut obs = seat_observation(&arena, seat, tick_cap);
            obs.step_index = arena.tick;
            let privileged = Privileged::Showdown(Truth {
                arena: arena.clone(),
                seat,
            });
            let agent = &mut seats[seat];
            let wants_truth = agent.capabilities().privileged;
            let request = AgentRequest {
                descriptor: &descriptor,
                seat,
                system_prompt: system,
                observation: &obs,
                history: &histories[seat],
                action_space: &action_space,
                privileged: wants_truth.then_some(&privileged),
            };
            let reply = match agent.act(&request) {
                Ok(r) => r,
                Err(_) => {
                    errors[seat] += 1;
                    String::new()
                }
            };
            match parse_arena_action(&reply) {
                Some(a) => actions[seat] = a,
                None => invalid[seat] += 1,
            }
            let h = &mut histories[seat];
            h.push(HistoryEntry {
                step_index: arena.tick,
                prompt: obs.turn_prompt(),
                reply,
            });
            if h.len() > HISTORY_WINDOW {
                h.remove(0);
            }
        }
        arena.showdown_tick(&actions);
        actions_log.push(actions);
    }
    Ok(MatchRecord {
        schema_version: MATCH_SCHEMA_VERSION,
        game_index,
        seed,
        tick_cap,
        result: MatchResult::from_arena(&arena, &agents),
        agents,
        actions: actions_log,
        invalid,
        transport_errors: errors,
    })
}

/// Re-simulates a logged match from its seed and actions.
pub fn replay_match(record: &MatchRecord) -> Result<MatchResult> {
    if record.schema_version != MATCH_SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: record.schema_version,
            expected: MATCH_SCHEMA_VERSION,
        });
    }
    let mut arena = Arena::generate(record.seed);
    for actions in &record.actions {
        arena.showdown_tick(actions);
    }
    Ok(MatchResult::from_arena(&arena, &record.agents))
}
