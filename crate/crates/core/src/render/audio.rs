use std::f64::consts::TAU;
use std::io::Cursor;

use hound::{SampleFormat, WavSpec, WavWriter};

use crate::engine::{AudioKind, AudioPayload, CueKind, NoteId};
use crate::error::Result;

pub const SAMPLE_RATE: u32 = 22_050;
const AMPLITUDE: f64 = 0.3;
const FADE_MS: f64 = 5.0;

/// 16-bit mono PCM.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Waveform {
    pub sample_rate: u32,
    pub samples: Vec<i16>,
}

impl Waveform {
    pub fn duration_ms(&self) -> f64 {
        self.samples.len() as f64 * 1000.0 / self.sample_rate as f64
    }
}

fn ms_to_samples(ms: f64) -> usize {
    (ms * SAMPLE_RATE as f64 / 1000.0).round() as usize
}

fn mix(buf: &mut Vec<f64>, start: usize, chunk: &[f64]) {
    if buf.len() < start + chunk.len() {
        buf.resize(start + chunk.len(), 0.0);
    }
    for (slot, s) in buf[start..].iter_mut().zip(chunk) {
        *slot += s;
    }
}

fn tone(note: NoteId, duration_ms: u32) -> Result<Vec<f64>> {
    let freq = note.checked()?.frequency();
    let n = ms_to_samples(duration_ms as f64);
    let fade = ms_to_samples(FADE_MS).max(1).min(n / 2 + 1);
    Ok((0..n)
        .map(|i| {
            let t = i as f64 / SAMPLE_RATE as f64;
            let edge = i.min(n - 1 - i) as f64;
            let env = (edge / fade as f64).min(1.0);
            AMPLITUDE * env * (TAU * freq * t).sin()
        })
        .collect())
}

fn cue(kind: CueKind) -> Vec<f64> {
    match kind {
        CueKind::BombPlaced => {
            let n = ms_to_samples(160.0);
            (0..n)
                .map(|i| {
                    let t = i as f64 / SAMPLE_RATE as f64;
                    AMPLITUDE * (-t * 30.0).exp() * (TAU * 330.0 * t).sin()
                })
                .collect()
        }
        CueKind::Explosion => {
            let n = ms_to_samples(400.0);
            let mut state: u32 = 0x9E37_79B9;
            (0..n)
                .map(|i| {
                    state ^= state << 13;
                    state ^= state >> 17;
                    state ^= state << 5;
                    let noise = state as f64 / u32::MAX as f64 * 2.0 - 1.0;
                    let t = i as f64 / SAMPLE_RATE as f64;
                    let thump = (TAU * 60.0 * t).sin();
                    AMPLITUDE * (-t * 8.0).exp() * (0.6 * noise + 0.4 * thump)
                })
                .collect()
        }
        CueKind::Powerup => {
            let n = ms_to_samples(200.0);
            let dur = n as f64 / SAMPLE_RATE as f64;
            (0..n)
                .map(|i| {
                    let t = i as f64 / SAMPLE_RATE as f64;
                    // Linear chirp 660 -> 1320 Hz; phase is the integral of frequency.
                    let phase = TAU * (660.0 * t + 330.0 * t * t / dur);
                    AMPLITUDE * phase.sin()
                })
                .collect()
        }
    }
}

/// Renders tone and cue payloads. Transcript payloads have no waveform.
pub fn synthesize_audio(payload: &AudioPayload) -> Result<Option<Waveform>> {
    let mut buf = Vec::new();
    match payload.kind {
        AudioKind::Transcript => return Ok(None),
        AudioKind::Tones => {
            for ev in &payload.tone_events {
                mix(
                    &mut buf,
                    ms_to_samples(ev.onset_ms as f64),
                    &tone(ev.note, ev.duration_ms)?,
                );
            }
        }
        AudioKind::Cues => {
            for ev in &payload.cue_events {
                mix(&mut buf, ms_to_samples(ev.onset_ms as f64), &cue(ev.cue));
            }
        }
    }
    let samples = buf
        .into_iter()
        .map(|s| (s.clamp(-1.0, 1.0) * i16::MAX as f64).round() as i16)
        .collect();
    Ok(Some(Waveform {
        sample_rate: SAMPLE_RATE,
        samples,
    }))
}

pub fn encode_wav(wave: &Waveform) -> Result<Vec<u8>> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: wave.sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut out = Cursor::new(Vec::new());
    {
        let mut writer = WavWriter::new(&mut out, spec)?;
        for &s in &wave.samples {
            writer.write_sample(s)?;
        }
        writer.finalize()?;
    }
    Ok(out.into_inner())
}
