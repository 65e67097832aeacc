//! Binary encodings of an observation's channels.

use omniplay::engine::VideoManifestEntry;
use omniplay::render::{encode_png, encode_wav, synthesize_audio};
use omniplay::ObservationBundle;

use crate::error::Result;

#[derive(Clone, Debug, Default)]
pub struct Attachments {
    pub frame_png: Option<Vec<u8>>,
    pub audio_wav: Option<Vec<u8>>,
    /// Speech channels travel as text.
    pub transcript: Option<String>,
    pub video: Vec<(VideoManifestEntry, Vec<u8>)>,
}

impl Attachments {
    pub fn encode(obs: &ObservationBundle) -> Result<Self> {
        let mut out = Self::default();
        if let Some(frame) = &obs.frame {
            out.frame_png = Some(encode_png(frame)?);
        }
        if let Some(audio) = &obs.audio {
            out.transcript = audio.transcript.clone();
            if let Some(wave) = synthesize_audio(audio)? {
                out.audio_wav = Some(encode_wav(&wave)?);
            }
        }
        if let Some(clip) = &obs.video {
            for (entry, frame) in clip.manifest().into_iter().zip(&clip.frames) {
                out.video.push((entry, encode_png(frame)?));
            }
        }
        Ok(out)
    }
}

/// `k` indices spread evenly over `0..n`, always keeping the first and last.
pub fn subsample(n: usize, k: usize) -> Vec<usize> {
    if n <= k {
        return (0..n).collect();
    }
    match k {
        0 => Vec::new(),
        1 => vec![0],
        _ => (0..k)
            .map(|i| (i * (n - 1) + (k - 1) / 2) / (k - 1))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::subsample;

    #[test]
    fn subsample_spreads_evenly() {
        assert_eq!(subsample(3, 8), vec![0, 1, 2]);
        assert_eq!(subsample(10, 2), vec![0, 9]);
        assert_eq!(subsample(9, 3), vec![0, 4, 8]);
        let picks = subsample(100, 8);
        assert_eq!(picks.len(), 8);
        assert!(picks.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*picks.last().unwrap(), 99);
    }
}
