//! Keyed random streams.
//!
//! Every random draw in an episode comes from a ChaCha stream whose key is
//! derived from `(seed, label, index)`. Streams never share state, so drawing
//! more noise can never shift a maze layout.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest as _, Sha256};

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Substream {
    /// World generation: mazes, icon grids, color mappings, terrain, arenas.
    Layout,
    /// Guidance phrasing choices.
    Guidance,
    /// Observation noise recipes.
    Noise,
    /// Per-step intervention transforms.
    Intervention,
    /// Randomness owned by built-in agents.
    Agent,
    /// Built-in opponents seated next to the evaluated agent.
    Opponents,
}

impl Substream {
    pub fn label(self) -> &'static str {
        match self {
            Substream::Layout => "layout",
            Substream::Guidance => "guidance",
            Substream::Noise => "noise",
            Substream::Intervention => "intervention",
            Substream::Agent => "agent",
            Substream::Opponents => "opponents",
        }
    }
}

pub fn substream(seed: u64, stream: Substream) -> StreamRng {
    keyed(seed, stream.label(), 0)
}

/// Stream for the `index`-th use of `stream`, e.g. one per episode step.
pub fn substream_at(seed: u64, stream: Substream, index: u64) -> StreamRng {
    keyed(seed, stream.label(), index)
}

pub fn keyed(seed: u64, label: &str, index: u64) -> StreamRng {
    let mut hasher = Sha256::new();
    hasher.update(b"omniplay-rng-v1");
    hasher.update(seed.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update(index.to_le_bytes());
    let key: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(key)
}
