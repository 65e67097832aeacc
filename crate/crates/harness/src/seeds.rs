//! Frozen evaluation seed manifests, one per game.

use std::path::Path;

use omniplay::digest::{ContentHasher, Digest};
use omniplay::GameId;
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::error::{io_err, HarnessError, Result};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedManifest {
    pub game: GameId,
    pub version: u32,
    pub seeds: Vec<u64>,
}

impl SeedManifest {
    /// The manifest shipped with the crate.
    pub fn builtin(game: GameId) -> Self {
        let text = match game {
            GameId::Pathfinding => include_str!("../seeds/pathfinding.json"),
            GameId::Echoes => include_str!("../seeds/echoes.json"),
            GameId::Melody => include_str!("../seeds/melody.json"),
            GameId::Phantom => include_str!("../seeds/phantom.json"),
            GameId::Showdown => include_str!("../seeds/showdown.json"),
        };
        serde_json::from_str(text).expect("shipped manifests are valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let manifest: Self = serde_json::from_str(&text)?;
        if manifest.version != MANIFEST_VERSION {
            return Err(HarnessError::Config(format!(
                "{}: unsupported manifest version {}",
                path.display(),
                manifest.version
            )));
        }
        Ok(manifest)
    }

    /// The first `n` seeds.
    pub fn take(&self, n: usize) -> Result<&[u64]> {
        self.seeds
            .get(..n)
            .ok_or_else(|| HarnessError::ManifestTooShort {
                game: self.game.to_string(),
                available: self.seeds.len(),
                requested: n,
            })
    }

    pub fn digest(&self) -> Digest {
        let mut h = ContentHasher::new("seed-manifest");
        h.json(self);
        h.finish()
    }

    pub fn contains(&self, seed: u64) -> bool {
        self.seeds.contains(&seed)
    }
}

/// The generator the shipped manifests were produced with. Kept for audit
/// only; the JSON files are the source of truth.
pub fn derive_seed(game: GameId, index: usize) -> u64 {
    let hash = Sha256::digest(format!("omniplay-seed-manifest-v1/{game}/{index}").as_bytes());
    let mut head = [0u8; 8];
    head.copy_from_slice(&hash[..8]);
    u64::from_le_bytes(head) & ((1 << 53) - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_manifests_match_generator_and_counts() {
        for game in GameId::ALL {
            let m = SeedManifest::builtin(game);
            assert_eq!(m.game, game);
            assert_eq!(m.seeds.len(), game.default_episodes());
            for (i, &s) in m.seeds.iter().enumerate() {
                assert_eq!(s, derive_seed(game, i));
            }
        }
    }
}
