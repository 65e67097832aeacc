//! Discover a hidden color-to-note mapping and play the ascending scale.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::digest::{ContentHasher, Digest};
use crate::engine::{
    ActionEnvelope, ActionPayload, ActionSpace, AudioPayload, Difficulty, EnvDescriptor,
    Environment, GameId, MetricMap, NoteId, ObservationBundle, Outcome, Privileged, Status,
    ToneEvent,
};
use crate::error::{Error, Result};
use crate::grammar;
use crate::render::{frames, prompt};
use crate::rng::{substream, Substream};

pub const STEP_CAP: u32 = 100;
/// C major, C4 to B4.
pub const SCALE: [NoteId; 7] = [
    NoteId(60),
    NoteId(62),
    NoteId(64),
    NoteId(65),
    NoteId(67),
    NoteId(69),
    NoteId(71),
];
/// Six probes pin down the mapping, then seven notes play the scale.
pub const REQUIRED_STEPS: u32 = 13;
pub const TONE_MS: u32 = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorId {
    Red,
    Orange,
    Yellow,
    Green,
    Blue,
    Purple,
    Pink,
}

impl ColorId {
    pub const ALL: [ColorId; 7] = [
        ColorId::Red,
        ColorId::Orange,
        ColorId::Yellow,
        ColorId::Green,
        ColorId::Blue,
        ColorId::Purple,
        ColorId::Pink,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ColorId::Red => "red",
            ColorId::Orange => "orange",
            ColorId::Yellow => "yellow",
            ColorId::Green => "green",
            ColorId::Blue => "blue",
            ColorId::Purple => "purple",
            ColorId::Pink => "pink",
        }
    }

    pub fn rgb(self) -> [u8; 3] {
        match self {
            ColorId::Red => [220, 40, 40],
            ColorId::Orange => [240, 140, 30],
            ColorId::Yellow => [240, 220, 40],
            ColorId::Green => [50, 170, 70],
            ColorId::Blue => [40, 90, 220],
            ColorId::Purple => [140, 60, 190],
            ColorId::Pink => [240, 130, 190],
        }
    }

    pub fn parse(word: &str) -> Option<Self> {
        ColorId::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(word))
    }
}

/// Bijection from colors to scale notes, indexed by `ColorId::index`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorNoteMapping {
    pub notes: [NoteId; 7],
}

impl ColorNoteMapping {
    pub fn generate(seed: u64) -> Self {
        let mut notes = SCALE;
        notes.shuffle(&mut substream(seed, Substream::Layout));
        Self { notes }
    }

    pub fn note_of(&self, color: ColorId) -> NoteId {
        self.notes[color.index()]
    }

    pub fn color_of(&self, note: NoteId) -> Option<ColorId> {
        ColorId::ALL.into_iter().find(|c| self.note_of(*c) == note)
    }
}

/// One valid click.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Click {
    pub color: ColorId,
    pub note: NoteId,
    pub hit: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MelodyStats {
    pub total_steps: u32,
    pub hits: u32,
    pub required_steps: u32,
    /// Clicks inside runs of two or more consecutive hits.
    pub correct_streak_total: u32,
    /// Clicks inside runs of two or more consecutive misses.
    pub error_streak_total: u32,
    /// Clicks inside runs of two or more consecutive misses on one color.
    pub same_color_error_total: u32,
    pub color_changes: u32,
    pub completed: bool,
}

fn run_total<T>(
    items: &[T],
    same_run: impl Fn(&T, &T) -> bool,
    counts: impl Fn(&T) -> bool,
) -> u32 {
    let mut total = 0;
    let mut i = 0;
    while i < items.len() {
        if !counts(&items[i]) {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < items.len() && counts(&items[j]) && same_run(&items[j - 1], &items[j]) {
            j += 1;
        }
        if j - i >= 2 {
            total += (j - i) as u32;
        }
        i = j;
    }
    total
}

impl MelodyStats {
    pub fn from_clicks(clicks: &[Click], completed: bool) -> Self {
        Self {
            total_steps: clicks.len() as u32,
            hits: clicks.iter().filter(|c| c.hit).count() as u32,
            required_steps: REQUIRED_STEPS,
            correct_streak_total: run_total(clicks, |_, _| true, |c| c.hit),
            error_streak_total: run_total(clicks, |_, _| true, |c| !c.hit),
            same_color_error_total: run_total(clicks, |a, b| a.color == b.color, |c| !c.hit),
            color_changes: clicks
                .windows(2)
                .filter(|w| w[0].color != w[1].color)
                .count() as u32,
            completed,
        }
    }
}

/// The six-part composite in [0, 100].
pub fn composite_score(stats: &MelodyStats) -> Result<f64> {
    if stats.total_steps == 0 {
        return Err(Error::EmptyEpisode);
    }
    let n = stats.total_steps as f64;
    let a = stats.hits as f64 / n * 30.0;
    let b = if stats.total_steps <= stats.required_steps {
        30.0
    } else {
        30.0 * stats.required_steps as f64 / n
    };
    let c = stats.correct_streak_total as f64 / n * 10.0;
    let d = 10.0 - stats.error_streak_total as f64 / n * 10.0;
    let e = 15.0 - stats.same_color_error_total as f64 / n * 15.0;
    let f = if stats.total_steps == 1 {
        5.0
    } else {
        stats.color_changes as f64 / (n - 1.0) * 5.0
    };
    Ok((a + b + c + d + e + f).clamp(0.0, 100.0))
}

pub fn parse_color(body: &str) -> Option<ColorId> {
    match grammar::words(body).as_slice() {
        [verb, color] if verb == "click" => ColorId::parse(color),
        [color] => ColorId::parse(color),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Truth {
    pub mapping: ColorNoteMapping,
    pub cursor: usize,
    pub clicks: Vec<Click>,
}

pub struct MelodyEnv {
    descriptor: EnvDescriptor,
    mapping: ColorNoteMapping,
    cursor: usize,
    clicks: Vec<Click>,
    completed: bool,
}

impl MelodyEnv {
    pub fn new(descriptor: EnvDescriptor) -> Result<Self> {
        if descriptor.difficulty != Difficulty::Medium {
            return Err(Error::UnsupportedDifficulty {
                game: GameId::Melody,
                difficulty: descriptor.difficulty,
            });
        }
        Ok(Self {
            mapping: ColorNoteMapping::generate(descriptor.seed),
            descriptor,
            cursor: 0,
            clicks: Vec::new(),
            completed: false,
        })
    }

    pub fn mapping(&self) -> &ColorNoteMapping {
        &self.mapping
    }

    pub fn stats(&self) -> MelodyStats {
        MelodyStats::from_clicks(&self.clicks, self.completed)
    }

    /// Plays `color`; a wrong note sends progress back to the start.
    pub fn melody_click(&mut self, color: ColorId) -> Click {
        let note = self.mapping.note_of(color);
        let hit = note == SCALE[self.cursor];
        self.cursor = if hit { self.cursor + 1 } else { 0 };
        if self.cursor == SCALE.len() {
            self.completed = true;
        }
        let click = Click { color, note, hit };
        self.clicks.push(click);
        click
    }

    /// Pairs heard so far, in order of first discovery.
    pub fn discovered(&self) -> Vec<(ColorId, NoteId)> {
        let mut out: Vec<(ColorId, NoteId)> = Vec::new();
        for c in &self.clicks {
            if !out.iter().any(|(col, _)| *col == c.color) {
                out.push((c.color, c.note));
            }
        }
        out
    }

    fn state_dump(&self) -> String {
        let feedback = match self.clicks.last() {
            None => "No blocks clicked yet.".to_string(),
            Some(c) if c.hit && self.completed => {
                format!("You clicked {} and completed the melody.", c.color.name())
            }
            Some(c) if c.hit => format!("You clicked {}. That was the right note.", c.color.name()),
            Some(c) => format!(
                "You clicked {}. That was not the next note, so the melody starts over.",
                c.color.name()
            ),
        };
        let next = SCALE
            .get(self.cursor)
            .map(|n| n.name())
            .unwrap_or_else(|| "none".into());
        let heard = self.discovered();
        let untested: Vec<&str> = ColorId::ALL
            .iter()
            .filter(|c| !heard.iter().any(|(h, _)| h == *c))
            .map(|c| c.name())
            .collect();
        let misses = self.clicks.iter().rev().take_while(|c| !c.hit).count();
        format!(
            "Feedback: {feedback}\n\
             Sequence status: {} of 7 notes played correctly. Next note needed: {next}.\n\
             Clicks so far: {}\n\
             Strategic hints:\n\
             - Colors tried: {} of 7\n\
             - Untried colors: {}\n\
             - Wrong notes in a row: {misses}",
            self.cursor,
            self.clicks.len(),
            heard.len(),
            if untested.is_empty() {
                "none".to_string()
            } else {
                untested.join(", ")
            },
        )
    }
}

impl Environment for MelodyEnv {
    fn descriptor(&self) -> &EnvDescriptor {
        &self.descriptor
    }

    fn system_prompt(&self) -> String {
        prompt::MELODY.system_text.to_string()
    }

    fn observe(&self) -> ObservationBundle {
        let dump = self.state_dump();
        let text = prompt::MELODY
            .turn(&[("state_dump", &dump)])
            .expect("melody template fields");
        let tones = self
            .clicks
            .last()
            .map(|c| {
                vec![ToneEvent {
                    note: c.note,
                    onset_ms: 0,
                    duration_ms: TONE_MS,
                }]
            })
            .unwrap_or_default();
        let mut obs = ObservationBundle::new(prompt::MELODY.action_request);
        obs.frame = Some(frames::melody_blocks(self.clicks.last().map(|c| c.color)));
        obs.audio = Some(AudioPayload::tones(tones));
        obs.text = Some(text);
        obs
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete(
            ColorId::ALL
                .iter()
                .map(|c| format!("click {}", c.name()))
                .collect(),
        )
    }

    fn parse_action(&self, raw: &str) -> ActionEnvelope {
        match grammar::first_action(raw).as_deref().and_then(parse_color) {
            Some(color) => {
                ActionEnvelope::valid(GameId::Melody, ActionPayload::Color { color }, raw)
            }
            None => ActionEnvelope::invalid(GameId::Melody, raw),
        }
    }

    fn apply(&mut self, action: &ActionEnvelope) -> String {
        let (ActionPayload::Color { color }, true) = (&action.payload, action.valid) else {
            return "invalid click ignored".into();
        };
        if self.completed {
            return "melody already complete".into();
        }
        let click = self.melody_click(*color);
        match (click.hit, self.completed) {
            (true, true) => "melody completed".into(),
            (true, false) => format!("hit; {} of 7", self.cursor),
            (false, _) => "miss; progress reset".into(),
        }
    }

    fn status(&self) -> Status {
        if self.completed {
            Status::Finished(Outcome::GoalReached)
        } else {
            Status::Running
        }
    }

    fn world_digest(&self) -> Digest {
        let mut h = ContentHasher::new("melody-world");
        h.json(&self.mapping)
            .json(&self.clicks)
            .u64(self.cursor as u64);
        h.finish()
    }

    fn raw_metrics(&self) -> MetricMap {
        let stats = self.stats();
        let mut m = MetricMap::new();
        m.insert("score".into(), composite_score(&stats).unwrap_or(0.0));
        m.insert("completed".into(), if stats.completed { 1.0 } else { 0.0 });
        m.insert("total_clicks".into(), stats.total_steps as f64);
        m.insert("hits".into(), stats.hits as f64);
        m.insert(
            "correct_streak_total".into(),
            stats.correct_streak_total as f64,
        );
        m.insert("error_streak_total".into(), stats.error_streak_total as f64);
        m.insert(
            "same_color_error_total".into(),
            stats.same_color_error_total as f64,
        );
        m.insert("color_changes".into(), stats.color_changes as f64);
        m
    }

    fn privileged(&self) -> Privileged {
        Privileged::Melody(Truth {
            mapping: self.mapping.clone(),
            cursor: self.cursor,
            clicks: self.clicks.clone(),
        })
    }

    fn aided_hint(&self) -> Option<String> {
        let pairs = self.discovered();
        let body = if pairs.is_empty() {
            "(no notes heard yet)".to_string()
        } else {
            pairs
                .iter()
                .map(|(c, n)| format!("- {} -> {}", c.name(), n.name()))
                .collect::<Vec<_>>()
                .join("\n")
        };
        Some(format!("{}\n{body}", prompt::AIDED_MAPPING_HEADER))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(seed: u64) -> MelodyEnv {
        MelodyEnv::new(EnvDescriptor::new(GameId::Melody, Difficulty::Medium, seed).unwrap())
            .unwrap()
    }

    #[test]
    fn mapping_is_bijective() {
        for seed in 0..20 {
            let m = ColorNoteMapping::generate(seed);
            let mut notes = m.notes;
            notes.sort();
            assert_eq!(notes, SCALE);
        }
    }

    #[test]
    fn perfect_play_scores_100() {
        let mut e = env(3);
        for note in SCALE {
            let c = e.mapping().color_of(note).unwrap();
            e.melody_click(c);
        }
        let stats = e.stats();
        assert!(stats.completed);
        assert_eq!(composite_score(&stats).unwrap(), 100.0);
    }

    #[test]
    fn same_color_errors_count_pairs() {
        let mut e = env(4);
        let wrong = ColorId::ALL
            .into_iter()
            .find(|c| e.mapping().note_of(*c) != SCALE[0])
            .unwrap();
        e.melody_click(wrong);
        e.melody_click(wrong);
        let s = e.stats();
        assert_eq!(s.same_color_error_total, 2);
        assert_eq!(s.error_streak_total, 2);
        assert_eq!(s.color_changes, 0);
    }

    #[test]
    fn degenerate_and_empty() {
        assert!(composite_score(&MelodyStats::default()).is_err());
        let clicks = vec![
            Click {
                color: ColorId::Red,
                note: NoteId(62),
                hit: false
            };
            50
        ];
        let s = MelodyStats::from_clicks(&clicks, false);
        let score = composite_score(&s).unwrap();
        assert!((score - 30.0 * 13.0 / 50.0).abs() < 1e-9);
    }

    #[test]
    fn color_grammar() {
        assert_eq!(parse_color("click Blue"), Some(ColorId::Blue));
        assert_eq!(parse_color("pink"), Some(ColorId::Pink));
        assert_eq!(parse_color("click teal"), None);
    }
}
