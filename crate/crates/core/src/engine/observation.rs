use serde::{Deserialize, Serialize};

use crate::digest::{ContentHasher, Digest};
use crate::error::{Error, Result};

pub type Frame = image::RgbImage;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Image,
    Video,
    Audio,
    Text,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Image => "image",
            Modality::Video => "video",
            Modality::Audio => "audio",
            Modality::Text => "text",
        }
    }
}

/// MIDI note number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NoteId(pub u8);

impl NoteId {
    pub const A4: NoteId = NoteId(69);
    const NAMES: [&'static str; 12] = [
        "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
    ];

    /// 12-TET frequency with A4 = 440 Hz.
    pub fn frequency(self) -> f64 {
        440.0 * 2f64.powf((self.0 as f64 - 69.0) / 12.0)
    }

    pub fn name(self) -> String {
        let octave = self.0 as i32 / 12 - 1;
        format!("{}{}", Self::NAMES[self.0 as usize % 12], octave)
    }

    pub fn checked(self) -> Result<Self> {
        if (21..=108).contains(&self.0) {
            Ok(self)
        } else {
            Err(Error::UnknownNote(self.0))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AudioKind {
    Transcript,
    Tones,
    Cues,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToneEvent {
    pub note: NoteId,
    pub onset_ms: u32,
    pub duration_ms: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CueKind {
    BombPlaced,
    Explosion,
    Powerup,
}

impl CueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CueKind::BombPlaced => "bomb_placed",
            CueKind::Explosion => "explosion",
            CueKind::Powerup => "powerup",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CueEvent {
    pub cue: CueKind,
    pub onset_ms: u32,
}

/// Audio channel content. The transcript is the canonical payload for
/// speech; waveforms are synthesized on demand by the renderer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AudioPayload {
    pub kind: AudioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tone_events: Vec<ToneEvent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cue_events: Vec<CueEvent>,
}

impl AudioPayload {
    pub fn transcript(text: impl Into<String>) -> Self {
        Self {
            kind: AudioKind::Transcript,
            transcript: Some(text.into()),
            tone_events: Vec::new(),
            cue_events: Vec::new(),
        }
    }

    pub fn tones(events: Vec<ToneEvent>) -> Self {
        Self {
            kind: AudioKind::Tones,
            transcript: None,
            tone_events: events,
            cue_events: Vec::new(),
        }
    }

    pub fn cues(events: Vec<CueEvent>) -> Self {
        Self {
            kind: AudioKind::Cues,
            transcript: None,
            tone_events: Vec::new(),
            cue_events: events,
        }
    }

    /// Checks the payload invariants: non-empty transcripts and
    /// non-decreasing onsets.
    pub fn is_well_formed(&self) -> bool {
        let transcript_ok = self.kind != AudioKind::Transcript
            || self.transcript.as_deref().is_some_and(|t| !t.is_empty());
        let tones_ok = self
            .tone_events
            .windows(2)
            .all(|w| w[0].onset_ms <= w[1].onset_ms);
        let cues_ok = self
            .cue_events
            .windows(2)
            .all(|w| w[0].onset_ms <= w[1].onset_ms);
        transcript_ok && tones_ok && cues_ok
    }

    fn describe(&self) -> &'static str {
        match self.kind {
            AudioKind::Transcript => "audio (speech transcript)",
            AudioKind::Tones => "audio (tones)",
            AudioKind::Cues => "audio (sound cues)",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VideoManifestEntry {
    pub index: usize,
    pub timestamp_ms: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VideoClip {
    pub frames: Vec<Frame>,
    pub fps: f64,
}

impl VideoClip {
    pub fn manifest(&self) -> Vec<VideoManifestEntry> {
        (0..self.frames.len())
            .map(|index| VideoManifestEntry {
                index,
                timestamp_ms: (index as f64 * 1000.0 / self.fps).round() as u64,
            })
            .collect()
    }
}

/// One timestep's multimodal output.
///
/// `text` is the state-bearing turn prompt. The channel inventory line and
/// the action request skeleton are always appended by [`turn_prompt`], so a
/// text ablation still leaves the agent a minimal request.
///
/// [`turn_prompt`]: ObservationBundle::turn_prompt
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationBundle {
    pub step_index: u32,
    pub frame: Option<Frame>,
    pub video: Option<VideoClip>,
    pub audio: Option<AudioPayload>,
    pub text: Option<String>,
    pub action_request: String,
}

impl ObservationBundle {
    pub fn new(action_request: impl Into<String>) -> Self {
        Self {
            step_index: 0,
            frame: None,
            video: None,
            audio: None,
            text: None,
            action_request: action_request.into(),
        }
    }

    pub fn channels(&self) -> Vec<Modality> {
        let mut out = Vec::new();
        if self.frame.is_some() {
            out.push(Modality::Image);
        }
        if self.video.is_some() {
            out.push(Modality::Video);
        }
        if self.audio.is_some() {
            out.push(Modality::Audio);
        }
        if self.text.is_some() {
            out.push(Modality::Text);
        }
        out
    }

    pub fn inventory_line(&self) -> String {
        let mut parts: Vec<&str> = Vec::new();
        if self.frame.is_some() {
            parts.push("image");
        }
        if let Some(v) = &self.video {
            parts.push(if v.frames.len() == 1 {
                "video (1 frame)"
            } else {
                "video"
            });
        }
        if let Some(a) = &self.audio {
            parts.push(a.describe());
        }
        if self.text.is_some() {
            parts.push("text");
        }
        if parts.is_empty() {
            "Inputs this turn: none.".to_string()
        } else {
            format!("Inputs this turn: {}.", parts.join(", "))
        }
    }

    /// The full text shown to the agent for this step.
    pub fn turn_prompt(&self) -> String {
        let mut out = String::new();
        if let Some(text) = &self.text {
            out.push_str(text.trim_end());
            out.push_str("\n\n");
        }
        out.push_str(&self.inventory_line());
        out.push('\n');
        out.push_str(&self.action_request);
        out
    }

    pub fn transcript(&self) -> Option<&str> {
        self.audio.as_ref().and_then(|a| a.transcript.as_deref())
    }

    pub fn channel_digests(&self) -> ChannelDigests {
        ChannelDigests {
            frame: self.frame.as_ref().map(frame_digest),
            video: self.video.as_ref().map(|v| {
                let mut h = ContentHasher::new("video");
                h.f64(v.fps).u64(v.frames.len() as u64);
                for f in &v.frames {
                    h.digest(&frame_digest(f));
                }
                h.finish()
            }),
            audio: self.audio.as_ref().map(|a| {
                let mut h = ContentHasher::new("audio");
                h.json(a);
                h.finish()
            }),
            text: self.text.as_ref().map(|t| {
                let mut h = ContentHasher::new("text");
                h.str(t);
                h.finish()
            }),
        }
    }

    pub fn digest(&self) -> Digest {
        self.to_ref().digest
    }

    pub fn to_ref(&self) -> ObservationRef {
        let channels = self.channel_digests();
        let prompt = self.turn_prompt();
        let mut h = ContentHasher::new("observation");
        h.u64(self.step_index as u64);
        for d in [
            &channels.frame,
            &channels.video,
            &channels.audio,
            &channels.text,
        ] {
            match d {
                Some(d) => h.bool(true).digest(d),
                None => h.bool(false),
            };
        }
        h.str(&prompt);
        ObservationRef {
            digest: h.finish(),
            channels,
            prompt,
            transcript: self.transcript().map(str::to_string),
        }
    }
}

pub fn frame_digest(frame: &Frame) -> Digest {
    let mut h = ContentHasher::new("frame");
    h.u64(frame.width() as u64)
        .u64(frame.height() as u64)
        .bytes(frame.as_raw());
    h.finish()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelDigests {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Digest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video: Option<Digest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio: Option<Digest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<Digest>,
}

/// What an episode record keeps of an observation: digests for replay,
/// plus the prompt and transcript for inspection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationRef {
    pub digest: Digest,
    pub channels: ChannelDigests,
    pub prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<String>,
}
