//! Squad command under fog of war: capture objectives, some hidden, within
//! a round limit.

pub mod map;
pub mod score;

use serde::{Deserialize, Serialize};

use crate::digest::{ContentHasher, Digest};
use crate::engine::{
    ActionEnvelope, ActionPayload, ActionSpace, AudioPayload, Difficulty, EnvDescriptor,
    Environment, GameId, MetricMap, ObservationBundle, Outcome, Privileged, Status, VideoClip,
};
use crate::error::Result;
use crate::games::grid::Pos;
use crate::grammar;
use crate::render::{frames, prompt};

pub use map::{generate_scenario, Objective, TacticalMap, Unit, UnitKind};
pub use score::{estimate_target_rounds, phantom_score, PhantomScore, ScoreInputs};

pub const VIDEO_FPS: f64 = 2.0;

pub fn round_limit(difficulty: Difficulty) -> Option<u32> {
    match difficulty {
        Difficulty::Easy => Some(20),
        Difficulty::Medium => Some(25),
        Difficulty::Hard => Some(30),
        Difficulty::None => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
pub enum UnitCommand {
    Move {
        unit: String,
        x: i32,
        y: i32,
    },
    Scout {
        unit: String,
    },
    Capture {
        unit: String,
    },
    Hold {
        unit: String,
    },
    /// A line that named no known unit or did not parse; kept for scoring.
    Invalid {
        line: String,
    },
}

impl UnitCommand {
    pub fn unit(&self) -> Option<&str> {
        match self {
            UnitCommand::Move { unit, .. }
            | UnitCommand::Scout { unit }
            | UnitCommand::Capture { unit }
            | UnitCommand::Hold { unit } => Some(unit),
            UnitCommand::Invalid { .. } => None,
        }
    }
}

/// Parses one command line against the roster and map bounds.
pub fn parse_command(body: &str, map: &TacticalMap) -> UnitCommand {
    let invalid = || UnitCommand::Invalid {
        line: body.to_string(),
    };
    let cleaned = body.replace(['(', ')'], " ");
    let words = grammar::words(&cleaned);
    let Some(unit) = words
        .get(1)
        .and_then(|id| map.unit(id))
        .map(|u| u.id.clone())
    else {
        return invalid();
    };
    match (words[0].as_str(), &words[2..]) {
        ("move", [x, y]) => {
            let (Some(x), Some(y)) = (grammar::number(x), grammar::number(y)) else {
                return invalid();
            };
            if x.fract() != 0.0 || y.fract() != 0.0 {
                return invalid();
            }
            let target = Pos::new(x as i32, y as i32);
            if !map.in_bounds(target) {
                return invalid();
            }
            UnitCommand::Move {
                unit,
                x: target.x,
                y: target.y,
            }
        }
        ("scout", []) => UnitCommand::Scout { unit },
        ("capture", []) => UnitCommand::Capture { unit },
        ("hold", []) => UnitCommand::Hold { unit },
        _ => invalid(),
    }
}

pub fn parse_commands(reply: &str, map: &TacticalMap) -> Vec<UnitCommand> {
    let mut out: Vec<UnitCommand> = Vec::new();
    for body in grammar::action_bodies(reply) {
        let cmd = parse_command(&body, map);
        let duplicate = cmd
            .unit()
            .is_some_and(|u| out.iter().any(|c| c.unit() == Some(u)));
        out.push(if duplicate {
            UnitCommand::Invalid { line: body }
        } else {
            cmd
        });
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Truth {
    pub map: TacticalMap,
    pub round: u32,
    pub target_rounds: u32,
}

pub struct PhantomEnv {
    descriptor: EnvDescriptor,
    map: TacticalMap,
    target_rounds: u32,
    round: u32,
    boosted: Vec<bool>,
    valid_rounds: u32,
    finished_round: Option<u32>,
    /// Per-unit cells walked last round, starting cell included, for the video.
    last_paths: Vec<Vec<Pos>>,
    last_report: Vec<String>,
    revealed: Vec<String>,
}

impl PhantomEnv {
    pub fn new(descriptor: EnvDescriptor) -> Result<Self> {
        let map = generate_scenario(descriptor.seed, descriptor.difficulty)?;
        let target_rounds = estimate_target_rounds(&map);
        let n = map.units.len();
        Ok(Self {
            descriptor,
            map,
            target_rounds,
            round: 0,
            boosted: vec![false; n],
            valid_rounds: 0,
            finished_round: None,
            last_paths: vec![Vec::new(); n],
            last_report: Vec::new(),
            revealed: Vec::new(),
        })
    }

    pub fn map(&self) -> &TacticalMap {
        &self.map
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn target_rounds(&self) -> u32 {
        self.target_rounds
    }

    fn max_rounds(&self) -> u32 {
        round_limit(self.descriptor.difficulty).expect("validated difficulty")
    }

    fn mission_complete(&self) -> bool {
        self.map.objectives.iter().all(|o| o.completed)
    }

    pub fn score_inputs(&self) -> ScoreInputs {
        let captured_points = self
            .map
            .objectives
            .iter()
            .filter(|o| o.completed)
            .map(|o| o.points)
            .sum();
        ScoreInputs {
            captured_points,
            aux_points: self.valid_rounds as f64,
            base_points: self.map.base_score(),
            dynamic_bonus: self.map.bonus_pool(),
            target_rounds: self.target_rounds,
            max_rounds: self.max_rounds(),
            rounds_used: self.finished_round.unwrap_or(self.round),
            valid_rounds: self.valid_rounds,
            completed: self.map.objectives.iter().filter(|o| o.completed).count() as u32,
            total: self.map.objectives.len() as u32,
        }
    }

    pub fn score(&self) -> PhantomScore {
        phantom_score(&self.score_inputs())
    }

    /// Executes one round of commands; units without a command hold.
    pub fn phantom_round(&mut self, commands: &[UnitCommand]) -> bool {
        let mut all_valid = !commands.is_empty();
        let mut report = Vec::new();
        let mut boosted = vec![false; self.map.units.len()];
        let mut paths = vec![Vec::new(); self.map.units.len()];
        for cmd in commands {
            let Some(i) = cmd
                .unit()
                .and_then(|id| self.map.units.iter().position(|u| u.id == id))
            else {
                all_valid = false;
                if let UnitCommand::Invalid { line } = cmd {
                    report.push(format!("command \"{line}\" was not understood"));
                }
                continue;
            };
            let unit = self.map.units[i].clone();
            match cmd {
                UnitCommand::Move { x, y, .. } => {
                    let path =
                        self.map
                            .move_destination(unit.pos, Pos::new(*x, *y), unit.kind.speed());
                    if let Some(&end) = path.last() {
                        self.map.units[i].pos = end;
                    }
                    report.push(format!(
                        "{} moved to ({}, {})",
                        unit.id, self.map.units[i].pos.x, self.map.units[i].pos.y
                    ));
                    paths[i] = std::iter::once(unit.pos).chain(path).collect();
                }
                UnitCommand::Scout { .. } => {
                    boosted[i] = true;
                    report.push(format!("{} scouted the area", unit.id));
                }
                UnitCommand::Capture { .. } => {
                    let round = self.round;
                    match self
                        .map
                        .objectives
                        .iter_mut()
                        .find(|o| o.pos == unit.pos && o.is_open(round))
                    {
                        Some(o) => {
                            o.completed = true;
                            report.push(format!("{} captured objective {}", unit.id, o.id));
                        }
                        None => {
                            all_valid = false;
                            report.push(format!(
                                "{} capture failed: no open objective here",
                                unit.id
                            ));
                        }
                    }
                }
                UnitCommand::Hold { .. } => report.push(format!("{} held position", unit.id)),
                UnitCommand::Invalid { .. } => unreachable!("invalid commands name no unit"),
            }
        }
        self.round += 1;
        self.boosted = boosted;
        self.revealed = self.map.update_fog(&self.boosted, self.round);
        if all_valid {
            self.valid_rounds += 1;
        }
        if self.finished_round.is_none() && self.mission_complete() {
            self.finished_round = Some(self.round);
        }
        self.last_paths = paths;
        self.last_report = report;
        all_valid
    }

    fn situation(&self) -> String {
        let mut lines = vec!["Known objectives:".to_string()];
        let known: Vec<&Objective> = self
            .map
            .objectives
            .iter()
            .filter(|o| o.discovered && o.is_active(self.round))
            .collect();
        if known.is_empty() {
            lines.push("- none".into());
        }
        for o in &known {
            lines.push(format!(
                "- {}{} ({} pts) at x={}, y={}: {}",
                o.id,
                if o.bonus { " [bonus]" } else { "" },
                o.points,
                o.pos.x,
                o.pos.y,
                if o.completed { "captured" } else { "open" }
            ));
        }
        let unknown = self
            .map
            .objectives
            .iter()
            .filter(|o| !o.bonus && !o.discovered)
            .count();
        lines.push(format!("Hidden objectives not yet found: {unknown}"));
        lines.push(String::new());
        lines.push("Units:".into());
        for u in &self.map.units {
            lines.push(format!(
                "- {} {} at x={}, y={} (speed {}, vision {})",
                u.id,
                u.kind.name(),
                u.pos.x,
                u.pos.y,
                u.kind.speed(),
                u.kind.vision()
            ));
        }
        lines.push(String::new());
        if self.last_report.is_empty() {
            lines.push("Last round: no orders yet.".into());
        } else {
            lines.push(format!("Last round: {}.", self.last_report.join("; ")));
        }
        let s = self.score_inputs();
        lines.push(format!(
            "Points captured: {} of {}",
            s.captured_points,
            s.base_points + s.dynamic_bonus
        ));
        lines.join("\n")
    }

    /// Spoken tactical briefing for this round.
    fn transcript(&self) -> String {
        let mut parts = vec![format!("Command update, round {}.", self.round + 1)];
        for id in &self.revealed {
            if let Some(o) = self.map.objectives.iter().find(|o| &o.id == id) {
                let what = if o.bonus {
                    "Bonus objective"
                } else {
                    "Objective"
                };
                parts.push(format!(
                    "{what} {} sighted at {}, {}.",
                    o.id, o.pos.x, o.pos.y
                ));
            }
        }
        for u in &self.map.units {
            let nearest = self
                .map
                .objectives
                .iter()
                .filter(|o| o.is_open(self.round))
                .filter_map(|o| self.map.path_length(u.pos, o.pos).map(|d| (d, o)))
                .min_by_key(|(d, o)| (*d, o.id.clone()));
            match nearest {
                Some((0, o)) => parts.push(format!(
                    "{} is on objective {}, ready to capture.",
                    u.id, o.id
                )),
                Some((d, o)) => parts.push(format!(
                    "{} nearest open objective is {}, {} steps {}.",
                    u.id,
                    o.id,
                    d,
                    compass(u.pos, o.pos)
                )),
                None => {}
            }
        }
        let unknown = self
            .map
            .objectives
            .iter()
            .filter(|o| !o.bonus && !o.discovered)
            .count();
        if unknown > 0 {
            parts.push(format!("{unknown} objectives remain hidden in the fog."));
        }
        parts.join(" ")
    }
}

fn compass(from: Pos, to: Pos) -> &'static str {
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    let ns = if dy < 0 {
        "north"
    } else if dy > 0 {
        "south"
    } else {
        ""
    };
    let ew = if dx > 0 {
        "east"
    } else if dx < 0 {
        "west"
    } else {
        ""
    };
    match (ns.is_empty(), ew.is_empty()) {
        (false, false) if dx.abs() * 2 < dy.abs() => ns,
        (false, false) if dy.abs() * 2 < dx.abs() => ew,
        (false, false) => match (ns, ew) {
            ("north", "east") => "north-east",
            ("north", _) => "north-west",
            (_, "east") => "south-east",
            _ => "south-west",
        },
        (false, true) => ns,
        (true, false) => ew,
        (true, true) => "here",
    }
}

impl Environment for PhantomEnv {
    fn descriptor(&self) -> &EnvDescriptor {
        &self.descriptor
    }

    fn system_prompt(&self) -> String {
        prompt::PHANTOM.system_text.to_string()
    }

    fn observe(&self) -> ObservationBundle {
        let round = (self.round + 1).to_string();
        let max_rounds = self.max_rounds().to_string();
        let situation = self.situation();
        let text = prompt::PHANTOM
            .turn(&[
                ("round", &round),
                ("max_rounds", &max_rounds),
                ("situation", &situation),
            ])
            .expect("phantom template fields");
        let visible = self.map.visible(&self.boosted);
        let longest = self
            .last_paths
            .iter()
            .map(Vec::len)
            .max()
            .unwrap_or(0)
            .max(1);
        let frames = (0..longest)
            .map(|k| {
                let positions: Vec<Pos> = self
                    .map
                    .units
                    .iter()
                    .zip(&self.last_paths)
                    .map(|(u, walk)| walk.get(k).or(walk.last()).copied().unwrap_or(u.pos))
                    .collect();
                frames::phantom_map(&self.map, &visible, &positions, self.round)
            })
            .collect();
        let mut obs = ObservationBundle::new(prompt::PHANTOM.action_request);
        obs.video = Some(VideoClip {
            frames,
            fps: VIDEO_FPS,
        });
        obs.audio = Some(AudioPayload::transcript(self.transcript()));
        obs.text = Some(text);
        obs
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::PerUnit(
            self.map
                .units
                .iter()
                .map(|u| {
                    let mut opts = vec![
                        format!("hold {}", u.id),
                        format!("scout {}", u.id),
                        format!("capture {}", u.id),
                    ];
                    for (dx, dy) in [(0, -2), (2, 0), (0, 2), (-2, 0)] {
                        let t = Pos::new(u.pos.x + dx, u.pos.y + dy);
                        if self.map.in_bounds(t) {
                            opts.push(format!("move {} {} {}", u.id, t.x, t.y));
                        }
                    }
                    opts
                })
                .collect(),
        )
    }

    fn parse_action(&self, raw: &str) -> ActionEnvelope {
        let commands = parse_commands(raw, &self.map);
        if commands
            .iter()
            .any(|c| !matches!(c, UnitCommand::Invalid { .. }))
        {
            ActionEnvelope::valid(GameId::Phantom, ActionPayload::Commands { commands }, raw)
        } else {
            ActionEnvelope::invalid(GameId::Phantom, raw)
        }
    }

    fn apply(&mut self, action: &ActionEnvelope) -> String {
        let commands = match (&action.payload, action.valid) {
            (ActionPayload::Commands { commands }, true) => commands.clone(),
            _ => {
                self.round += 1;
                self.last_paths = vec![Vec::new(); self.map.units.len()];
                self.last_report = vec!["no valid orders were received".into()];
                self.revealed.clear();
                return "invalid orders; all units held".into();
            }
        };
        let clean = self.phantom_round(&commands);
        format!(
            "round {} resolved{}",
            self.round,
            if clean { "" } else { " with rejected commands" }
        )
    }

    fn status(&self) -> Status {
        if self.mission_complete() {
            Status::Finished(Outcome::GoalReached)
        } else {
            Status::Running
        }
    }

    fn world_digest(&self) -> Digest {
        let mut h = ContentHasher::new("phantom-world");
        h.json(&self.map)
            .json(&self.boosted)
            .u64(self.valid_rounds as u64);
        h.finish()
    }

    fn raw_metrics(&self) -> MetricMap {
        let s = self.score();
        let mut m = MetricMap::new();
        m.insert("normalized".into(), s.normalized);
        m.insert("success_rate".into(), s.success_rate);
        m.insert("captured_points".into(), s.captured_points);
        m.insert("aux_points".into(), s.aux_points);
        m.insert("base_points".into(), s.base_points);
        m.insert("score_ceiling".into(), s.score_ceiling);
        m.insert("target_rounds".into(), s.target_rounds as f64);
        m.insert("max_rounds".into(), s.max_rounds as f64);
        m.insert("rounds_used".into(), s.rounds_used as f64);
        m
    }

    fn privileged(&self) -> Privileged {
        Privileged::Phantom(Truth {
            map: self.map.clone(),
            round: self.round,
            target_rounds: self.target_rounds,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(seed: u64, d: Difficulty) -> TacticalMap {
        generate_scenario(seed, d).unwrap()
    }

    #[test]
    fn scenario_rules() {
        for seed in 0..10 {
            let easy = map(seed, Difficulty::Easy);
            assert_eq!(easy.objectives.len(), 3);
            assert!(easy.objectives.iter().all(|o| o.discovered && !o.hidden));
            let med = map(seed, Difficulty::Medium);
            assert_eq!(med.objectives.iter().filter(|o| o.hidden).count(), 1);
            assert!(med.units.iter().any(|u| u.kind == UnitKind::Scout));
            let hard = map(seed, Difficulty::Hard);
            assert_eq!(hard.objectives.iter().filter(|o| !o.bonus).count(), 5);
            assert_eq!(hard.objectives.iter().filter(|o| o.bonus).count(), 1);
            assert!((hard.bonus_pool() - 0.2 * hard.base_score()).abs() < 1e-9);
            for o in &hard.objectives {
                assert!(hard.path_length(hard.units[0].pos, o.pos).is_some());
            }
        }
    }

    #[test]
    fn command_grammar() {
        let m = map(1, Difficulty::Medium);
        assert_eq!(
            parse_command("move U2 3 4", &m),
            UnitCommand::Move {
                unit: "U2".into(),
                x: 3,
                y: 4
            }
        );
        assert_eq!(
            parse_command("scout u1", &m),
            UnitCommand::Scout { unit: "U1".into() }
        );
        assert!(matches!(
            parse_command("move U9 1 1", &m),
            UnitCommand::Invalid { .. }
        ));
        assert!(matches!(
            parse_command("move U1 99 1", &m),
            UnitCommand::Invalid { .. }
        ));
        let cmds = parse_commands("ACTION: hold U1\nACTION: scout U1", &m);
        assert!(matches!(cmds[1], UnitCommand::Invalid { .. }));
    }

    #[test]
    fn bresenham_endpoints() {
        let l = map::line(Pos::new(0, 0), Pos::new(5, 2));
        assert_eq!(l.first(), Some(&Pos::new(0, 0)));
        assert_eq!(l.last(), Some(&Pos::new(5, 2)));
        assert_eq!(l.len(), 6);
    }
}
