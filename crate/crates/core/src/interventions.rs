//! Diagnostic manipulations of what the agent perceives. Every transform
//! acts on an observation only; world state and scoring are untouched.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::engine::{Frame, GameId, ObservationBundle};
use crate::error::{Error, Result};
use crate::render::prompt::SUBSTITUTION_HEADER;
use crate::rng::{substream_at, StreamRng, Substream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Audio,
    Image,
    Text,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Audio => "audio",
            Channel::Image => "image",
            Channel::Text => "text",
        }
    }
}

pub const NOISE_WORDS: [&str; 8] = [
    "zap", "chirp", "blip", "fizz", "krrk", "bzzt", "whirr", "plink",
];
pub const NOISE_LETTERS: [&str; 4] = ["w", "b", "q", "x"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AudioNoise {
    /// Chance of a noise word before each token.
    pub word_rate: f64,
    /// Chance of a noise letter before each token.
    pub letter_rate: f64,
    pub words: Vec<String>,
    pub letters: Vec<String>,
}

impl Default for AudioNoise {
    fn default() -> Self {
        Self {
            word_rate: 0.15,
            letter_rate: 0.10,
            words: NOISE_WORDS.iter().map(|s| s.to_string()).collect(),
            letters: NOISE_LETTERS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl AudioNoise {
    pub fn is_noise_token(&self, token: &str) -> bool {
        self.words.iter().chain(&self.letters).any(|w| w == token)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImageNoise {
    /// Standard deviation in 8-bit intensity units.
    pub gaussian_sigma: f64,
    pub salt_pepper_p: f64,
    /// Odd box-blur width; 1 disables blurring.
    pub blur_kernel: u32,
}

impl Default for ImageNoise {
    fn default() -> Self {
        Self {
            gaussian_sigma: 20.0,
            salt_pepper_p: 0.05,
            blur_kernel: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InterventionConfig {
    Conflict {
        channel: Channel,
    },
    Ablation {
        removed: Channel,
    },
    Noise {
        target: Channel,
        #[serde(default)]
        audio: AudioNoise,
        #[serde(default)]
        image: ImageNoise,
    },
    AidedPrompt {},
    Simplified {},
    Substitution {},
}

impl InterventionConfig {
    pub fn name(&self) -> &'static str {
        match self {
            InterventionConfig::Conflict { .. } => "conflict",
            InterventionConfig::Ablation { .. } => "ablation",
            InterventionConfig::Noise { .. } => "noise",
            InterventionConfig::AidedPrompt {} => "aided_prompt",
            InterventionConfig::Simplified {} => "simplified",
            InterventionConfig::Substitution {} => "substitution",
        }
    }

    pub fn applicable_games(&self) -> &'static [GameId] {
        match self {
            InterventionConfig::Conflict { .. } => &[GameId::Pathfinding],
            InterventionConfig::Ablation { .. } => &[GameId::Pathfinding, GameId::Echoes],
            InterventionConfig::Noise { .. } | InterventionConfig::Substitution {} => {
                &[GameId::Phantom]
            }
            InterventionConfig::AidedPrompt {} => &[GameId::Echoes, GameId::Melody],
            InterventionConfig::Simplified {} => &[GameId::Echoes],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidIntervention(msg.to_string()));
        match self {
            InterventionConfig::Conflict {
                channel: Channel::Image,
            } => bad("conflict applies to the audio or text channel"),
            InterventionConfig::Noise {
                target: Channel::Text,
                ..
            } => bad("noise applies to the audio or image channel"),
            InterventionConfig::Noise { audio, image, .. } => {
                let rate = |r: f64| (0.0..=1.0).contains(&r);
                if !rate(audio.word_rate) || !rate(audio.letter_rate) || !rate(image.salt_pepper_p)
                {
                    return bad("noise rates must lie in [0, 1]");
                }
                if !(image.gaussian_sigma >= 0.0 && image.gaussian_sigma.is_finite()) {
                    return bad("gaussian sigma must be finite and non-negative");
                }
                if image.blur_kernel % 2 == 0 {
                    return bad("blur kernel must be odd");
                }
                if (audio.word_rate > 0.0 && audio.words.is_empty())
                    || (audio.letter_rate > 0.0 && audio.letters.is_empty())
                {
                    return bad("noise lexicon is empty");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn check_applicable(&self, game: GameId) -> Result<()> {
        self.validate()?;
        if self.applicable_games().contains(&game) {
            Ok(())
        } else {
            Err(Error::InterventionNotApplicable {
                intervention: self.name().into(),
                game,
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterventionContext {
    pub game: GameId,
    pub seed: u64,
    pub step_index: u32,
    /// The environment's hint block for the aided-prompt variant.
    pub aided_hint: Option<String>,
}

pub fn apply(
    cfg: &InterventionConfig,
    obs: ObservationBundle,
    ctx: &InterventionContext,
) -> ObservationBundle {
    match cfg {
        InterventionConfig::Conflict { channel } => apply_conflict(obs, *channel),
        InterventionConfig::Ablation { removed } => apply_ablation(obs, *removed),
        InterventionConfig::Noise {
            target,
            audio,
            image,
        } => {
            let mut rng = substream_at(ctx.seed, Substream::Intervention, ctx.step_index as u64);
            apply_noise(obs, *target, audio, image, &mut rng)
        }
        InterventionConfig::AidedPrompt {} => apply_aided_prompt(obs, ctx.aided_hint.as_deref()),
        InterventionConfig::Simplified {} => obs,
        InterventionConfig::Substitution {} => apply_substitution(obs),
    }
}

/// Swaps whole words by lookup, keeping capitalisation and punctuation.
fn swap_words(text: &str, pairs: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(text.len());
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String| {
        let lower = word.to_ascii_lowercase();
        let swapped = pairs.iter().find_map(|(a, b)| {
            if lower == *a {
                Some(*b)
            } else if lower == *b {
                Some(*a)
            } else {
                None
            }
        });
        match swapped {
            Some(s) if word.starts_with(|c: char| c.is_ascii_uppercase()) => {
                let mut cs = s.chars();
                if let Some(f) = cs.next() {
                    out.push(f.to_ascii_uppercase());
                    out.push_str(cs.as_str());
                }
            }
            Some(s) => out.push_str(s),
            None => out.push_str(word),
        }
        word.clear();
    };
    for ch in text.chars() {
        if ch.is_ascii_alphabetic() {
            word.push(ch);
        } else {
            flush(&mut word, &mut out);
            out.push(ch);
        }
    }
    flush(&mut word, &mut out);
    out
}

const AROUND: &str = "Turn around, then move forward";
const STRAIGHT: &str = "Move forward";

/// Reverses spoken guidance: left and right trade places, and so do ahead
/// and behind.
pub fn invert_guidance(transcript: &str) -> String {
    let swapped = swap_words(transcript, &[("left", "right"), ("ahead", "behind")]);
    if let Some(rest) = swapped.strip_prefix(AROUND) {
        format!("{STRAIGHT}{rest}")
    } else if let Some(rest) = swapped.strip_prefix(STRAIGHT) {
        format!("{AROUND}{rest}")
    } else {
        swapped
    }
}

fn flip_degrees(value: &str) -> Option<String> {
    let v: f64 = value.trim().parse().ok()?;
    let flipped = (v + 180.0).rem_euclid(360.0);
    Some(if value.contains('.') {
        let decimals = value.trim().split('.').nth(1).map_or(0, str::len);
        format!("{flipped:.decimals$}")
    } else {
        format!("{flipped}")
    })
}

/// Inverts orientation and target direction fields of a state report.
pub fn invert_state_report(text: &str) -> String {
    let mut lines = Vec::new();
    for line in text.split('\n') {
        let rewritten = if let Some(rest) = line.strip_prefix("Heading: ") {
            rest.strip_suffix(" degrees")
                .and_then(flip_degrees)
                .map(|v| format!("Heading: {v} degrees"))
        } else if let Some(rest) = line.strip_prefix("Target bearing: ") {
            rest.strip_suffix(" degrees")
                .and_then(flip_degrees)
                .map(|v| format!("Target bearing: {v} degrees"))
        } else if line.starts_with("Target direction: ") {
            Some(swap_words(line, &[("left", "right"), ("ahead", "behind")]))
        } else {
            None
        };
        lines.push(rewritten.unwrap_or_else(|| line.to_string()));
    }
    lines.join("\n")
}

pub fn apply_conflict(mut obs: ObservationBundle, channel: Channel) -> ObservationBundle {
    match channel {
        Channel::Audio => {
            if let Some(t) = obs.audio.as_mut().and_then(|a| a.transcript.as_mut()) {
                *t = invert_guidance(t);
            }
        }
        Channel::Text => {
            if let Some(t) = obs.text.as_mut() {
                *t = invert_state_report(t);
            }
        }
        Channel::Image => {}
    }
    obs
}

/// Drops one channel. Removing the image channel also drops video frames.
pub fn apply_ablation(mut obs: ObservationBundle, removed: Channel) -> ObservationBundle {
    match removed {
        Channel::Audio => obs.audio = None,
        Channel::Image => {
            obs.frame = None;
            obs.video = None;
        }
        Channel::Text => obs.text = None,
    }
    obs
}

/// Inserts noise tokens before the words of a transcript, keeping the
/// original words in order.
pub fn apply_audio_noise(transcript: &str, params: &AudioNoise, rng: &mut StreamRng) -> String {
    let mut out: Vec<&str> = Vec::new();
    for token in transcript.split_whitespace() {
        if rng.random_bool(params.word_rate) {
            if let Some(w) = params.words.choose(rng) {
                out.push(w);
            }
        }
        if rng.random_bool(params.letter_rate) {
            if let Some(l) = params.letters.choose(rng) {
                out.push(l);
            }
        }
        out.push(token);
    }
    out.join(" ")
}

pub fn apply_image_noise(frame: &Frame, params: &ImageNoise, rng: &mut StreamRng) -> Frame {
    let mut out = frame.clone();
    if params.gaussian_sigma > 0.0 {
        let normal = Normal::new(0.0, params.gaussian_sigma).expect("validated sigma");
        for px in out.pixels_mut() {
            for c in px.0.iter_mut() {
                *c = (*c as f64 + normal.sample(rng)).round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    if params.salt_pepper_p > 0.0 {
        for px in out.pixels_mut() {
            if rng.random_bool(params.salt_pepper_p) {
                px.0 = if rng.random_bool(0.5) {
                    [255; 3]
                } else {
                    [0; 3]
                };
            }
        }
    }
    if params.blur_kernel > 1 {
        out = box_blur(&out, params.blur_kernel);
    }
    out
}

fn box_blur(frame: &Frame, kernel: u32) -> Frame {
    let r = (kernel / 2) as i64;
    let (w, h) = (frame.width() as i64, frame.height() as i64);
    let mut out = frame.clone();
    for y in 0..h {
        for x in 0..w {
            let mut sum = [0u32; 3];
            let mut n = 0u32;
            for yy in (y - r).max(0)..=(y + r).min(h - 1) {
                for xx in (x - r).max(0)..=(x + r).min(w - 1) {
                    let p = frame.get_pixel(xx as u32, yy as u32).0;
                    for c in 0..3 {
                        sum[c] += p[c] as u32;
                    }
                    n += 1;
                }
            }
            out.put_pixel(
                x as u32,
                y as u32,
                image::Rgb(sum.map(|s| ((s + n / 2) / n) as u8)),
            );
        }
    }
    out
}

fn apply_noise(
    mut obs: ObservationBundle,
    target: Channel,
    audio: &AudioNoise,
    image: &ImageNoise,
    rng: &mut StreamRng,
) -> ObservationBundle {
    match target {
        Channel::Audio => {
            if let Some(t) = obs.audio.as_mut().and_then(|a| a.transcript.as_mut()) {
                *t = apply_audio_noise(t, audio, rng);
            }
        }
        Channel::Image => {
            if let Some(f) = obs.frame.as_mut() {
                *f = apply_image_noise(f, image, rng);
            }
            if let Some(v) = obs.video.as_mut() {
                for f in v.frames.iter_mut() {
                    *f = apply_image_noise(f, image, rng);
                }
            }
        }
        Channel::Text => {}
    }
    obs
}

fn append_block(obs: &mut ObservationBundle, block: &str) {
    let text = obs.text.get_or_insert_with(String::new);
    if !text.is_empty() {
        text.push_str("\n\n");
    }
    text.push_str(block);
}

pub fn apply_aided_prompt(mut obs: ObservationBundle, hint: Option<&str>) -> ObservationBundle {
    if let Some(h) = hint {
        append_block(&mut obs, h);
    }
    obs
}

/// Moves the spoken transcript into the text prompt and silences audio.
pub fn apply_substitution(mut obs: ObservationBundle) -> ObservationBundle {
    if let Some(t) = obs.audio.take().and_then(|a| a.transcript) {
        append_block(&mut obs, &format!("{SUBSTITUTION_HEADER}\n{t}"));
    }
    obs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guidance_inversion() {
        assert_eq!(
            invert_guidance("Turn right, then move forward 2 steps. The target is to the left, 4 cells away along the path."),
            "Turn left, then move forward 2 steps. The target is to the right, 4 cells away along the path."
        );
        assert_eq!(
            invert_guidance("Move forward 1 step. The target is ahead, 1 cells away along the path."),
            "Turn around, then move forward 1 step. The target is behind, 1 cells away along the path."
        );
        let s = "Turn around, then move forward 3 steps. The target is behind, 9 cells away.";
        assert_eq!(invert_guidance(&invert_guidance(s)), s);
    }

    #[test]
    fn report_inversion() {
        let r = "Position: x=1.5, y=2.5\nHeading: 90 degrees\nTarget direction: left\nTarget bearing: 270.0 degrees";
        let inv = invert_state_report(r);
        assert!(inv.contains("Heading: 270 degrees"));
        assert!(inv.contains("Target direction: right"));
        assert!(inv.contains("Target bearing: 90.0 degrees"));
        assert!(inv.starts_with("Position: x=1.5, y=2.5"));
    }

    #[test]
    fn scope_rules() {
        let conflict = InterventionConfig::Conflict {
            channel: Channel::Audio,
        };
        assert!(conflict.check_applicable(GameId::Pathfinding).is_ok());
        assert!(conflict.check_applicable(GameId::Melody).is_err());
        assert!(InterventionConfig::Substitution {}
            .check_applicable(GameId::Echoes)
            .is_err());
        assert!(InterventionConfig::Conflict {
            channel: Channel::Image
        }
        .validate()
        .is_err());
        let json = r#"{"kind":"noise","target":"audio"}"#;
        let cfg: InterventionConfig = serde_json::from_str(json).unwrap();
        assert!(cfg.check_applicable(GameId::Phantom).is_ok());
    }
}
