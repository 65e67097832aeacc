//! Two-phase sequence memory: transcribe a highlighted icon sequence from
//! video and tones, then reproduce it by clicking the grid.

use std::sync::LazyLock;

use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::digest::{ContentHasher, Digest};
use crate::engine::{
    ActionEnvelope, ActionPayload, ActionSpace, AudioPayload, Difficulty, EnvDescriptor,
    Environment, GameId, MetricMap, NoteId, ObservationBundle, Outcome, Privileged, Status,
    ToneEvent, VideoClip,
};
use crate::error::{Error, Result};
use crate::grammar;
use crate::render::raster::GLYPH_NAMES;
use crate::render::{frames, prompt};
use crate::rng::{substream, Substream};

pub const HIGHLIGHT_MS: u32 = 600;
pub const TONE_MS: u32 = 500;
pub const VIDEO_FPS: f64 = 5.0;
/// Twelve semitones from C4.
pub const NOTE_PALETTE: [u8; 12] = [60, 61, 62, 63, 64, 65, 66, 67, 68, 69, 70, 71];

pub fn grid_size(difficulty: Difficulty) -> Option<(i32, i32)> {
    match difficulty {
        Difficulty::Easy => Some((3, 3)),
        Difficulty::Medium | Difficulty::Hard => Some((4, 4)),
        Difficulty::None => None,
    }
}

pub fn sequence_length(difficulty: Difficulty) -> Option<usize> {
    match difficulty {
        Difficulty::Easy => Some(6),
        Difficulty::Medium => Some(9),
        Difficulty::Hard => Some(15),
        Difficulty::None => None,
    }
}

/// One transcription turn, one click per item, and as many again for
/// invalid replies.
pub fn step_cap_for(length: usize) -> u32 {
    1 + 2 * length as u32
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridCoord {
    pub row: i32,
    pub col: i32,
}

impl GridCoord {
    pub fn new(row: i32, col: i32) -> Self {
        Self { row, col }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscribedItem {
    pub coord: GridCoord,
    pub icon: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IconGrid {
    pub rows: i32,
    pub cols: i32,
    /// Glyph ids, row-major.
    pub icons: Vec<u8>,
    /// Tone of each cell, row-major.
    pub notes: Vec<NoteId>,
}

impl IconGrid {
    pub fn contains(&self, c: GridCoord) -> bool {
        c.row >= 0 && c.col >= 0 && c.row < self.rows && c.col < self.cols
    }

    fn index(&self, c: GridCoord) -> usize {
        (c.row * self.cols + c.col) as usize
    }

    pub fn icon_at(&self, c: GridCoord) -> u8 {
        self.icons[self.index(c)]
    }

    pub fn note_at(&self, c: GridCoord) -> NoteId {
        self.notes[self.index(c)]
    }

    pub fn coords(&self) -> Vec<GridCoord> {
        (0..self.rows)
            .flat_map(|r| (0..self.cols).map(move |c| GridCoord::new(r, c)))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EchoItem {
    pub coord: GridCoord,
    pub icon: u8,
    pub note: NoteId,
}

impl EchoItem {
    pub fn icon_name(&self) -> &'static str {
        GLYPH_NAMES[self.icon as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EchoSequence {
    pub items: Vec<EchoItem>,
}

pub fn generate_echo_sequence(
    seed: u64,
    difficulty: Difficulty,
) -> Result<(IconGrid, EchoSequence)> {
    let unsupported = Error::UnsupportedDifficulty {
        game: GameId::Echoes,
        difficulty,
    };
    let (rows, cols) = grid_size(difficulty).ok_or(unsupported)?;
    let length = sequence_length(difficulty).expect("sized difficulties have a length");
    let mut rng = substream(seed, Substream::Layout);
    let cells = (rows * cols) as usize;

    let mut glyphs: Vec<u8> = (0..GLYPH_NAMES.len() as u8).collect();
    glyphs.shuffle(&mut rng);
    glyphs.truncate(cells);
    let mut palette = NOTE_PALETTE;
    palette.shuffle(&mut rng);
    let notes = (0..cells)
        .map(|i| NoteId(palette[i % palette.len()]))
        .collect();
    let grid = IconGrid {
        rows,
        cols,
        icons: glyphs,
        notes,
    };

    let coords = grid.coords();
    let mut items: Vec<EchoItem> = Vec::with_capacity(length);
    while items.len() < length {
        let c = coords[rng.random_range(0..coords.len())];
        if items.last().is_some_and(|prev| prev.coord == c) {
            continue;
        }
        items.push(EchoItem {
            coord: c,
            icon: grid.icon_at(c),
            note: grid.note_at(c),
        });
    }
    Ok((grid, EchoSequence { items }))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EchoParseResult {
    pub transcribed: Vec<TranscribedItem>,
    pub parse_failed: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseScore {
    pub coord_acc: u32,
    pub icon_acc: u32,
    pub parse_failed: bool,
}

static ITEM: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*([A-Za-z][A-Za-z_-]*)\s*\)").unwrap()
});

/// Items of a `sequence (r,c,icon) ...` body, or `None` if the body is not
/// a transcription.
pub fn parse_transcription(body: &str) -> Option<Vec<TranscribedItem>> {
    let rest = body.trim();
    let rest = rest
        .get(..8)
        .filter(|p| p.eq_ignore_ascii_case("sequence"))
        .map(|_| &rest[8..])?;
    let items: Vec<TranscribedItem> = ITEM
        .captures_iter(rest)
        .map(|c| TranscribedItem {
            coord: GridCoord::new(c[1].parse().unwrap_or(-1), c[2].parse().unwrap_or(-1)),
            icon: c[3].to_ascii_lowercase(),
        })
        .collect();
    (!items.is_empty()).then_some(items)
}

pub fn parse_reply(reply: &str) -> EchoParseResult {
    match grammar::action_bodies(reply)
        .iter()
        .find_map(|b| parse_transcription(b))
    {
        Some(transcribed) => EchoParseResult {
            transcribed,
            parse_failed: false,
        },
        None => EchoParseResult {
            transcribed: Vec::new(),
            parse_failed: true,
        },
    }
}

/// Positional comparison: item `i` scores only against truth item `i`.
pub fn score_parse(result: &EchoParseResult, truth: &EchoSequence) -> ParseScore {
    if result.parse_failed {
        return ParseScore {
            coord_acc: 0,
            icon_acc: 0,
            parse_failed: true,
        };
    }
    let mut score = ParseScore::default();
    for (got, want) in result.transcribed.iter().zip(&truth.items) {
        if got.coord == want.coord {
            score.coord_acc += 1;
        }
        if got.icon == want.icon_name() {
            score.icon_acc += 1;
        }
    }
    score
}

pub fn simplified_task_score(coord_acc: f64, icon_acc: f64) -> f64 {
    0.5 * coord_acc + 0.5 * icon_acc
}

pub fn parse_click(body: &str) -> Option<GridCoord> {
    let cleaned = body.replace(['(', ')'], " ");
    let words = grammar::words(&cleaned);
    let [verb, r, c] = words.as_slice() else {
        return None;
    };
    if verb != "click" {
        return None;
    }
    let r = grammar::number(r)?;
    let c = grammar::number(c)?;
    if r.fract() != 0.0 || c.fract() != 0.0 {
        return None;
    }
    Some(GridCoord::new(r as i32, c as i32))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Transcribe,
    Execute,
    Done,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Truth {
    pub grid: IconGrid,
    pub sequence: EchoSequence,
    pub phase: Phase,
    pub cursor: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClickFeedback {
    Correct { index: usize, note: NoteId },
    Completed { note: NoteId },
    Wrong,
}

pub struct EchoesEnv {
    descriptor: EnvDescriptor,
    grid: IconGrid,
    sequence: EchoSequence,
    phase: Phase,
    simplified: bool,
    transcription: Option<Vec<TranscribedItem>>,
    cursor: usize,
    wrong: Option<GridCoord>,
    last_correct: Option<GridCoord>,
}

impl EchoesEnv {
    pub fn new(descriptor: EnvDescriptor) -> Result<Self> {
        let (grid, sequence) = generate_echo_sequence(descriptor.seed, descriptor.difficulty)?;
        Ok(Self {
            descriptor,
            grid,
            sequence,
            phase: Phase::Transcribe,
            simplified: false,
            transcription: None,
            cursor: 0,
            wrong: None,
            last_correct: None,
        })
    }

    pub fn grid(&self) -> &IconGrid {
        &self.grid
    }

    pub fn sequence(&self) -> &EchoSequence {
        &self.sequence
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    fn parse_result(&self) -> EchoParseResult {
        match &self.transcription {
            Some(t) => EchoParseResult {
                transcribed: t.clone(),
                parse_failed: false,
            },
            None => EchoParseResult {
                transcribed: Vec::new(),
                parse_failed: true,
            },
        }
    }

    /// Phase-two click against the cursor.
    pub fn phase2_click(&mut self, coord: GridCoord) -> ClickFeedback {
        let want = self.sequence.items[self.cursor];
        if coord != want.coord {
            self.wrong = Some(coord);
            self.phase = Phase::Done;
            return ClickFeedback::Wrong;
        }
        self.cursor += 1;
        self.last_correct = Some(coord);
        if self.cursor == self.sequence.items.len() {
            self.phase = Phase::Done;
            ClickFeedback::Completed { note: want.note }
        } else {
            ClickFeedback::Correct {
                index: self.cursor,
                note: want.note,
            }
        }
    }

    fn phase1_observation(&self) -> ObservationBundle {
        let (label, rows, cols, len) = (
            if self.simplified { "1 of 1" } else { "1 of 2" },
            self.grid.rows.to_string(),
            self.grid.cols.to_string(),
            self.sequence.items.len().to_string(),
        );
        let text = prompt::ECHOES_TRANSCRIBE
            .turn(&[
                ("phase_label", label),
                ("rows", &rows),
                ("cols", &cols),
                ("length", &len),
            ])
            .expect("echoes transcription fields");
        let mut obs = ObservationBundle::new(prompt::ECHOES_TRANSCRIBE.action_request);
        obs.video = Some(render_phase1_video(&self.grid, &self.sequence));
        obs.audio = Some(phase1_audio(&self.sequence));
        obs.text = Some(text);
        obs
    }

    fn phase2_observation(&self) -> ObservationBundle {
        let sequence_text = self
            .sequence
            .items
            .iter()
            .enumerate()
            .map(|(i, it)| {
                format!(
                    "{}. row {}, col {} ({})",
                    i + 1,
                    it.coord.row,
                    it.coord.col,
                    it.icon_name()
                )
            })
            .collect::<Vec<_>>()
            .join("\n");
        let feedback = match self.last_correct {
            None => "Click the first cell of the sequence.".to_string(),
            Some(c) => format!(
                "Your last click on row {}, col {} was correct.",
                c.row, c.col
            ),
        };
        let text = prompt::ECHOES_EXECUTE
            .turn(&[("sequence_text", &sequence_text), ("feedback", &feedback)])
            .expect("echoes execution fields");
        let tones = match self.last_correct {
            None => Vec::new(),
            Some(c) => vec![ToneEvent {
                note: self.grid.note_at(c),
                onset_ms: 0,
                duration_ms: TONE_MS,
            }],
        };
        let mut obs = ObservationBundle::new(prompt::ECHOES_EXECUTE.action_request);
        obs.frame = Some(frames::echoes_grid(&self.grid, None));
        obs.audio = Some(AudioPayload::tones(tones));
        obs.text = Some(text);
        obs
    }
}

pub fn phase1_audio(sequence: &EchoSequence) -> AudioPayload {
    AudioPayload::tones(
        sequence
            .items
            .iter()
            .enumerate()
            .map(|(i, it)| ToneEvent {
                note: it.note,
                onset_ms: i as u32 * HIGHLIGHT_MS,
                duration_ms: TONE_MS,
            })
            .collect(),
    )
}

pub fn phase1_frame_count(length: usize) -> usize {
    let total_ms = length as u64 * HIGHLIGHT_MS as u64;
    (total_ms as f64 / 1000.0 * VIDEO_FPS).ceil() as usize
}

/// Frames sampled at the video rate; each shows the item highlighted at
/// that instant.
pub fn render_phase1_video(grid: &IconGrid, sequence: &EchoSequence) -> VideoClip {
    let count = phase1_frame_count(sequence.items.len());
    let frames = (0..count)
        .map(|k| {
            let t_ms = (k as f64 * 1000.0 / VIDEO_FPS).round() as u64;
            let item = (t_ms / HIGHLIGHT_MS as u64) as usize;
            frames::echoes_grid(grid, sequence.items.get(item).map(|i| i.coord))
        })
        .collect();
    VideoClip {
        frames,
        fps: VIDEO_FPS,
    }
}

impl Environment for EchoesEnv {
    fn descriptor(&self) -> &EnvDescriptor {
        &self.descriptor
    }

    fn system_prompt(&self) -> String {
        prompt::ECHOES_SYSTEM.to_string()
    }

    fn observe(&self) -> ObservationBundle {
        match self.phase {
            Phase::Transcribe => self.phase1_observation(),
            Phase::Execute | Phase::Done => self.phase2_observation(),
        }
    }

    fn action_space(&self) -> ActionSpace {
        match self.phase {
            Phase::Transcribe => ActionSpace::Sequence {
                prefix: "sequence".into(),
                choices: self
                    .grid
                    .coords()
                    .into_iter()
                    .flat_map(|c| {
                        GLYPH_NAMES
                            .iter()
                            .map(move |n| format!("({},{},{})", c.row, c.col, n))
                    })
                    .collect(),
                length: self.sequence.items.len(),
            },
            _ => ActionSpace::Discrete(
                self.grid
                    .coords()
                    .into_iter()
                    .map(|c| format!("click {} {}", c.row, c.col))
                    .collect(),
            ),
        }
    }

    fn parse_action(&self, raw: &str) -> ActionEnvelope {
        match self.phase {
            Phase::Transcribe => {
                let parsed = parse_reply(raw);
                if parsed.parse_failed {
                    ActionEnvelope::invalid(GameId::Echoes, raw)
                } else {
                    ActionEnvelope::valid(
                        GameId::Echoes,
                        ActionPayload::Transcription {
                            items: parsed.transcribed,
                        },
                        raw,
                    )
                }
            }
            _ => match grammar::first_action(raw).as_deref().and_then(parse_click) {
                Some(c) if self.grid.contains(c) => {
                    ActionEnvelope::valid(GameId::Echoes, ActionPayload::Click { coord: c }, raw)
                }
                _ => ActionEnvelope::invalid(GameId::Echoes, raw),
            },
        }
    }

    fn apply(&mut self, action: &ActionEnvelope) -> String {
        match self.phase {
            Phase::Transcribe => {
                if let (ActionPayload::Transcription { items }, true) =
                    (&action.payload, action.valid)
                {
                    self.transcription = Some(items.clone());
                }
                self.phase = if self.simplified {
                    Phase::Done
                } else {
                    Phase::Execute
                };
                let s = score_parse(&self.parse_result(), &self.sequence);
                if s.parse_failed {
                    "transcription could not be parsed".into()
                } else {
                    format!(
                        "transcription recorded: {} coordinates, {} icons correct",
                        s.coord_acc, s.icon_acc
                    )
                }
            }
            Phase::Execute => match (&action.payload, action.valid) {
                (ActionPayload::Click { coord }, true) if self.grid.contains(*coord) => {
                    match self.phase2_click(*coord) {
                        ClickFeedback::Correct { index, .. } => {
                            format!("correct click {index} of {}", self.sequence.items.len())
                        }
                        ClickFeedback::Completed { .. } => "sequence completed".into(),
                        ClickFeedback::Wrong => {
                            format!("wrong click after {} correct", self.cursor)
                        }
                    }
                }
                _ => "invalid click ignored".into(),
            },
            Phase::Done => "episode already finished".into(),
        }
    }

    fn status(&self) -> Status {
        if self.phase != Phase::Done {
            return Status::Running;
        }
        let perfect = |s: ParseScore| {
            let n = self.sequence.items.len() as u32;
            s.coord_acc == n && s.icon_acc == n && !s.parse_failed
        };
        if self.simplified {
            if perfect(score_parse(&self.parse_result(), &self.sequence)) {
                Status::Finished(Outcome::GoalReached)
            } else {
                Status::Finished(Outcome::Eliminated)
            }
        } else if self.wrong.is_some() {
            Status::Finished(Outcome::Eliminated)
        } else {
            Status::Finished(Outcome::GoalReached)
        }
    }

    fn world_digest(&self) -> Digest {
        let mut h = ContentHasher::new("echoes-world");
        h.json(&self.grid)
            .json(&self.sequence)
            .json(&self.transcription)
            .u64(self.cursor as u64)
            .json(&self.wrong);
        h.finish()
    }

    fn raw_metrics(&self) -> MetricMap {
        let s = score_parse(&self.parse_result(), &self.sequence);
        let success = !self.simplified && self.cursor == self.sequence.items.len();
        let mut m = MetricMap::new();
        m.insert("coord_acc".into(), s.coord_acc as f64);
        m.insert("icon_acc".into(), s.icon_acc as f64);
        m.insert(
            "parse_failed".into(),
            if s.parse_failed { 1.0 } else { 0.0 },
        );
        m.insert("score".into(), self.cursor as f64);
        m.insert("success".into(), if success { 1.0 } else { 0.0 });
        m.insert("sequence_length".into(), self.sequence.items.len() as f64);
        if self.simplified {
            m.insert(
                "simplified_score".into(),
                simplified_task_score(s.coord_acc as f64, s.icon_acc as f64),
            );
        }
        m
    }

    fn privileged(&self) -> Privileged {
        Privileged::Echoes(Truth {
            grid: self.grid.clone(),
            sequence: self.sequence.clone(),
            phase: self.phase,
            cursor: self.cursor,
        })
    }

    fn aided_hint(&self) -> Option<String> {
        (self.phase == Phase::Execute).then(|| {
            format!(
                "{}\nYou are on step {} of {} of the sequence.",
                prompt::AIDED_PROGRESS_HEADER,
                self.cursor + 1,
                self.sequence.items.len()
            )
        })
    }

    fn set_simplified(&mut self) -> Result<()> {
        self.simplified = true;
        Ok(())
    }
}
