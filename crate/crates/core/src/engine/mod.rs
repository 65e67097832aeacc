//! The environment contract, the seeded episode loop and trajectory records.

mod action;
mod driver;
mod observation;
mod record;
mod replay;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::digest::Digest;
use crate::error::{Error, Result};
use crate::games::{echoes, melody, pathfinding, phantom, showdown};

pub use action::{ActionEnvelope, ActionPayload, ActionSpace};
pub use driver::{run_episode, EpisodeDriver, StepReport, HISTORY_WINDOW};
pub use observation::{
    AudioKind, AudioPayload, ChannelDigests, CueEvent, CueKind, Frame, Modality, NoteId,
    ObservationBundle, ObservationRef, ToneEvent, VideoClip, VideoManifestEntry,
};
pub use record::{EpisodeRecord, MetricMap, Outcome, StepRecord, SCHEMA_VERSION};
pub use replay::{replay, replay_with, ReplayResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameId {
    Pathfinding,
    Echoes,
    Melody,
    Phantom,
    Showdown,
}

impl GameId {
    pub const ALL: [GameId; 5] = [
        GameId::Pathfinding,
        GameId::Echoes,
        GameId::Melody,
        GameId::Phantom,
        GameId::Showdown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GameId::Pathfinding => "pathfinding",
            GameId::Echoes => "echoes",
            GameId::Melody => "melody",
            GameId::Phantom => "phantom",
            GameId::Showdown => "showdown",
        }
    }

    pub fn difficulties(self) -> &'static [Difficulty] {
        match self {
            GameId::Pathfinding | GameId::Echoes | GameId::Phantom => {
                &[Difficulty::Easy, Difficulty::Medium, Difficulty::Hard]
            }
            GameId::Melody => &[Difficulty::Medium],
            GameId::Showdown => &[Difficulty::None],
        }
    }

    /// Evaluation episodes per agent (games, for the tournament).
    pub fn default_episodes(self) -> usize {
        match self {
            GameId::Phantom => 30,
            _ => 50,
        }
    }
}

impl fmt::Display for GameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GameId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GameId::ALL
            .into_iter()
            .find(|g| g.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownGame(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
    None,
}

impl Difficulty {
    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
            Difficulty::None => "none",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Difficulty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            "none" | "n/a" => Ok(Difficulty::None),
            _ => Err(Error::UnknownDifficulty(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnvDescriptor {
    pub game_id: GameId,
    pub difficulty: Difficulty,
    pub seed: u64,
    pub step_cap: u32,
}

impl EnvDescriptor {
    /// Descriptor with the game's default step cap.
    pub fn new(game_id: GameId, difficulty: Difficulty, seed: u64) -> Result<Self> {
        let step_cap = default_step_cap(game_id, difficulty)?;
        let desc = Self {
            game_id,
            difficulty,
            seed,
            step_cap,
        };
        desc.validate()?;
        Ok(desc)
    }

    pub fn with_step_cap(mut self, step_cap: u32) -> Result<Self> {
        self.step_cap = step_cap;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.step_cap == 0 {
            return Err(Error::InvalidDescriptor(
                "step_cap must be at least 1".into(),
            ));
        }
        if !self.game_id.difficulties().contains(&self.difficulty) {
            return Err(Error::UnsupportedDifficulty {
                game: self.game_id,
                difficulty: self.difficulty,
            });
        }
        Ok(())
    }
}

fn default_step_cap(game: GameId, difficulty: Difficulty) -> Result<u32> {
    let unsupported = || Error::UnsupportedDifficulty { game, difficulty };
    Ok(match game {
        GameId::Pathfinding => pathfinding::STEP_CAP,
        GameId::Echoes => {
            let len = echoes::sequence_length(difficulty).ok_or_else(unsupported)?;
            echoes::step_cap_for(len)
        }
        GameId::Melody => melody::STEP_CAP,
        GameId::Phantom => phantom::round_limit(difficulty).ok_or_else(unsupported)?,
        GameId::Showdown => showdown::TICK_CAP,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Running,
    Finished(Outcome),
}

/// Ground truth handed only to agents that declare privileged access
/// (oracles). Remote and human agents never see it.
#[derive(Clone, Debug)]
pub enum Privileged {
    Pathfinding(pathfinding::Truth),
    Echoes(echoes::Truth),
    Melody(melody::Truth),
    Phantom(phantom::Truth),
    Showdown(showdown::Truth),
}

/// One game behind the common turn-based contract.
///
/// `observe` is pure; only `apply` mutates the world. Invalid envelopes must
/// leave `world_digest` unchanged (for the arena game an invalid action is
/// resolved exactly like `wait`).
pub trait Environment: Send {
    fn descriptor(&self) -> &EnvDescriptor;
    fn system_prompt(&self) -> String;
    fn observe(&self) -> ObservationBundle;
    fn action_space(&self) -> ActionSpace;
    fn parse_action(&self, raw: &str) -> ActionEnvelope;
    /// Applies one agent turn and returns a short transition note.
    fn apply(&mut self, action: &ActionEnvelope) -> String;
    fn status(&self) -> Status;
    fn world_digest(&self) -> Digest;
    fn raw_metrics(&self) -> MetricMap;
    fn privileged(&self) -> Privileged;

    /// Hint block for the aided-prompt diagnostic.
    fn aided_hint(&self) -> Option<String> {
        None
    }

    /// Collapses the episode to its perception phase.
    fn set_simplified(&mut self) -> Result<()> {
        Err(Error::InterventionNotApplicable {
            intervention: "simplified".into(),
            game: self.descriptor().game_id,
        })
    }
}

pub fn create_env(descriptor: EnvDescriptor) -> Result<Box<dyn Environment>> {
    descriptor.validate()?;
    Ok(match descriptor.game_id {
        GameId::Pathfinding => Box::new(pathfinding::PathfindingEnv::new(descriptor)?),
        GameId::Echoes => Box::new(echoes::EchoesEnv::new(descriptor)?),
        GameId::Melody => Box::new(melody::MelodyEnv::new(descriptor)?),
        GameId::Phantom => Box::new(phantom::PhantomEnv::new(descriptor)?),
        GameId::Showdown => Box::new(showdown::ShowdownEnv::new(descriptor)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_rules() {
        assert!(EnvDescriptor::new(GameId::Melody, Difficulty::Hard, 1).is_err());
        assert!(EnvDescriptor::new(GameId::Showdown, Difficulty::Easy, 1).is_err());
        assert!(EnvDescriptor::new(GameId::Pathfinding, Difficulty::None, 1).is_err());
        let d = EnvDescriptor::new(GameId::Pathfinding, Difficulty::Easy, 1).unwrap();
        assert_eq!(d.step_cap, 500);
        assert!(d.with_step_cap(0).is_err());
        assert_eq!("ECHOES".parse::<GameId>().unwrap(), GameId::Echoes);
        assert!("tetris".parse::<GameId>().is_err());
    }
}
