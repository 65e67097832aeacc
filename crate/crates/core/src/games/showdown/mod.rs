//! Four-player bomb arena, last one standing wins.

pub mod arena;
pub mod bot;
pub mod tournament;

use serde::{Deserialize, Serialize};

use crate::digest::{ContentHasher, Digest};
use crate::engine::{
    ActionEnvelope, ActionPayload, ActionSpace, AudioPayload, CueEvent, EnvDescriptor, Environment,
    GameId, MetricMap, ObservationBundle, Outcome, Privileged, Status,
};
use crate::error::Result;
use crate::games::grid::Pos;
use crate::grammar;
use crate::render::{frames, prompt};
use crate::rng::{substream_at, Substream};

pub use arena::{Arena, CellKind, PLAYERS};
pub use bot::survivor_action;

pub const TICK_CAP: u32 = 500;
/// Spacing between cues that fired during the same tick.
pub const CUE_SPACING_MS: u32 = 150;
const VIEW_RADIUS: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArenaAction {
    Up,
    Down,
    Left,
    Right,
    Bomb,
    Wait,
}

impl ArenaAction {
    pub const ALL: [ArenaAction; 6] = [
        ArenaAction::Up,
        ArenaAction::Down,
        ArenaAction::Left,
        ArenaAction::Right,
        ArenaAction::Bomb,
        ArenaAction::Wait,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ArenaAction::Up => "up",
            ArenaAction::Down => "down",
            ArenaAction::Left => "left",
            ArenaAction::Right => "right",
            ArenaAction::Bomb => "bomb",
            ArenaAction::Wait => "wait",
        }
    }
}

pub fn parse_arena_action(reply: &str) -> Option<ArenaAction> {
    let body = grammar::first_action(reply)?;
    let words = grammar::words(&body);
    let words: Vec<&str> = words
        .iter()
        .map(String::as_str)
        .filter(|w| !matches!(*w, "move" | "go" | "step" | "place" | "drop" | "a"))
        .collect();
    match words.as_slice() {
        ["up" | "north"] => Some(ArenaAction::Up),
        ["down" | "south"] => Some(ArenaAction::Down),
        ["left" | "west"] => Some(ArenaAction::Left),
        ["right" | "east"] => Some(ArenaAction::Right),
        ["bomb"] => Some(ArenaAction::Bomb),
        ["wait" | "stay" | "hold"] => Some(ArenaAction::Wait),
        _ => None,
    }
}

/// The arena plus the seat the evaluated agent occupies.
#[derive(Clone, Debug, PartialEq)]
pub struct Truth {
    pub arena: Arena,
    pub seat: usize,
}

/// Text status for one seat.
pub fn situation(arena: &Arena, seat: usize) -> String {
    let me = &arena.players[seat];
    let mut lines = Vec::new();
    if me.alive {
        lines.push(format!(
            "Your position: x={}, y={}. Blast range {}. Bombs ready: {}.",
            me.pos.x, me.pos.y, me.blast_range, me.bombs_available
        ));
    }
    lines.push("Players:".into());
    for p in &arena.players {
        let you = if p.seat == seat { " (you)" } else { "" };
        if p.alive {
            lines.push(format!(
                "- Player {} ({}){}: x={}, y={}, range {}",
                p.seat,
                arena::COLORS[p.seat],
                you,
                p.pos.x,
                p.pos.y,
                p.blast_range
            ));
        } else {
            lines.push(format!(
                "- Player {} ({}){}: eliminated",
                p.seat,
                arena::COLORS[p.seat],
                you
            ));
        }
    }
    lines.push("Bombs:".into());
    if arena.bombs.is_empty() {
        lines.push("- none".into());
    }
    for b in &arena.bombs {
        lines.push(format!(
            "- x={}, y={}: explodes in {} ticks, range {}, placed by Player {}",
            b.pos.x, b.pos.y, b.fuse, b.range, b.owner
        ));
    }
    let powerups: Vec<String> = arena
        .visible_powerups()
        .map(|p| format!("x={}, y={}", p.x, p.y))
        .collect();
    if !powerups.is_empty() {
        lines.push(format!("Power-ups: {}", powerups.join("; ")));
    }
    if me.alive {
        lines.push(format!(
            "Surroundings within {VIEW_RADIUS} cells, north at the top (# pillar, + crate, . floor, \
             o bomb, * power-up, digits are players, @ is you):"
        ));
        for y in me.pos.y - VIEW_RADIUS..=me.pos.y + VIEW_RADIUS {
            let row: String = (me.pos.x - VIEW_RADIUS..=me.pos.x + VIEW_RADIUS)
                .map(|x| map_char(arena, Pos::new(x, y), seat))
                .collect();
            lines.push(row);
        }
        if bot::danger_map(arena).contains_key(&me.pos) {
            lines.push("Warning: your cell is inside a pending blast.".into());
        }
    }
    lines.join("\n")
}

fn map_char(arena: &Arena, p: Pos, seat: usize) -> char {
    if arena.players[seat].alive && arena.players[seat].pos == p {
        return '@';
    }
    if let Some(q) = arena.players.iter().find(|q| q.alive && q.pos == p) {
        return char::from(b'0' + q.seat as u8);
    }
    if arena.bomb_at(p).is_some() {
        return 'o';
    }
    match arena.cell(p) {
        CellKind::Solid => '#',
        CellKind::Crate => '+',
        CellKind::Empty if arena.visible_powerups().any(|u| *u == p) => '*',
        CellKind::Empty => '.',
    }
}

/// Observation for one seat: full-arena frame, the sounds of the last tick
/// and the text status, using the observer prompt once eliminated.
pub fn seat_observation(arena: &Arena, seat: usize, max_ticks: u32) -> ObservationBundle {
    let template = if arena.players[seat].alive {
        &prompt::SHOWDOWN_ACTIVE
    } else {
        &prompt::SHOWDOWN_OBSERVER
    };
    let seat_s = seat.to_string();
    let tick = (arena.tick + 1).to_string();
    let max = max_ticks.to_string();
    let status = situation(arena, seat);
    let text = template
        .turn(&[
            ("seat", &seat_s),
            ("color", arena::COLORS[seat]),
            ("tick", &tick),
            ("max_ticks", &max),
            ("situation", &status),
        ])
        .expect("arena template fields");
    let cues = arena
        .cue_log
        .iter()
        .filter(|c| c.tick == arena.tick && arena.tick > 0)
        .enumerate()
        .map(|(i, c)| CueEvent {
            cue: c.cue,
            onset_ms: i as u32 * CUE_SPACING_MS,
        })
        .collect();
    let mut obs = ObservationBundle::new(template.action_request);
    obs.frame = Some(frames::showdown_arena(arena));
    obs.audio = Some(AudioPayload::cues(cues));
    obs.text = Some(text);
    obs
}

/// Built-in opponent moves for one tick; each seat draws from its own stream.
pub fn opponent_actions(arena: &Arena, seed: u64, agent_seat: usize) -> [ArenaAction; PLAYERS] {
    std::array::from_fn(|s| {
        if s == agent_seat {
            ArenaAction::Wait
        } else {
            let index = arena.tick as u64 * PLAYERS as u64 + s as u64;
            survivor_action(
                arena,
                s,
                &mut substream_at(seed, Substream::Opponents, index),
            )
        }
    })
}

/// Single-agent view of the arena: the agent holds seat 0, built-in bots
/// hold the rest.
pub struct ShowdownEnv {
    descriptor: EnvDescriptor,
    arena: Arena,
}

impl ShowdownEnv {
    pub const AGENT_SEAT: usize = 0;

    pub fn new(descriptor: EnvDescriptor) -> Result<Self> {
        Ok(Self {
            descriptor,
            arena: Arena::generate(descriptor.seed),
        })
    }

    pub fn arena(&self) -> &Arena {
        &self.arena
    }
}

impl Environment for ShowdownEnv {
    fn descriptor(&self) -> &EnvDescriptor {
        &self.descriptor
    }

    fn system_prompt(&self) -> String {
        prompt::SHOWDOWN_SYSTEM.to_string()
    }

    fn observe(&self) -> ObservationBundle {
        seat_observation(&self.arena, Self::AGENT_SEAT, self.descriptor.step_cap)
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete(
            ArenaAction::ALL
                .iter()
                .map(|a| a.as_str().to_string())
                .collect(),
        )
    }

    fn parse_action(&self, raw: &str) -> ActionEnvelope {
        match parse_arena_action(raw) {
            Some(action) => {
                ActionEnvelope::valid(GameId::Showdown, ActionPayload::Arena { action }, raw)
            }
            None => ActionEnvelope::invalid(GameId::Showdown, raw),
        }
    }

    fn apply(&mut self, action: &ActionEnvelope) -> String {
        let mine = match (&action.payload, action.valid) {
            (ActionPayload::Arena { action }, true) => *action,
            _ => ArenaAction::Wait,
        };
        let mut actions = opponent_actions(&self.arena, self.descriptor.seed, Self::AGENT_SEAT);
        actions[Self::AGENT_SEAT] = mine;
        self.arena.showdown_tick(&actions);
        let fallen: Vec<String> = self
            .arena
            .deaths
            .iter()
            .filter(|d| d.tick == self.arena.tick)
            .map(|d| format!("player {} eliminated", d.seat))
            .collect();
        if fallen.is_empty() {
            format!("tick {}: you chose {}", self.arena.tick, mine.as_str())
        } else {
            format!(
                "tick {}: you chose {}; {}",
                self.arena.tick,
                mine.as_str(),
                fallen.join(", ")
            )
        }
    }

    fn status(&self) -> Status {
        if !self.arena.players[Self::AGENT_SEAT].alive {
            Status::Finished(Outcome::Eliminated)
        } else if self.arena.is_over() {
            Status::Finished(Outcome::GoalReached)
        } else {
            Status::Running
        }
    }

    fn world_digest(&self) -> Digest {
        let mut h = ContentHasher::new("showdown-world");
        h.json(&self.arena);
        h.finish()
    }

    fn raw_metrics(&self) -> MetricMap {
        let me = &self.arena.players[Self::AGENT_SEAT];
        let mut m = MetricMap::new();
        m.insert(
            "win".into(),
            f64::from(u8::from(self.arena.winner() == Some(Self::AGENT_SEAT))),
        );
        m.insert("kills".into(), me.kills as f64);
        m.insert("deaths".into(), me.deaths as f64);
        m.insert(
            "placement".into(),
            self.arena.placements()[Self::AGENT_SEAT] as f64,
        );
        m.insert("ticks".into(), self.arena.tick as f64);
        m
    }

    fn privileged(&self) -> Privileged {
        Privileged::Showdown(Truth {
            arena: self.arena.clone(),
            seat: Self::AGENT_SEAT,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        assert_eq!(parse_arena_action("ACTION: up"), Some(ArenaAction::Up));
        assert_eq!(
            parse_arena_action("action: Move North"),
            Some(ArenaAction::Up)
        );
        assert_eq!(
            parse_arena_action("ACTION: place bomb"),
            Some(ArenaAction::Bomb)
        );
        assert_eq!(
            parse_arena_action("ACTION: `wait`"),
            Some(ArenaAction::Wait)
        );
        assert_eq!(parse_arena_action("ACTION: jump"), None);
        assert_eq!(parse_arena_action("up"), None);
    }

    #[test]
    fn observer_prompt_after_elimination() {
        let mut a = Arena::generate(2);
        assert!(seat_observation(&a, 1, TICK_CAP)
            .action_request
            .contains("<up|down"));
        a.players[1].alive = false;
        let obs = seat_observation(&a, 1, TICK_CAP);
        assert!(obs.action_request.contains("No action is needed"));
        assert!(obs.text.unwrap().contains("eliminated"));
    }
}
