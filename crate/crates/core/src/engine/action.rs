use serde::{Deserialize, Serialize};

use super::GameId;
use crate::games::echoes::{GridCoord, TranscribedItem};
use crate::games::melody::ColorId;
use crate::games::phantom::UnitCommand;
use crate::games::showdown::ArenaAction;

/// Parsed form of an agent reply, per game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ActionPayload {
    NoOp,
    Nav { rotate_deg: f64, move_units: f64 },
    Transcription { items: Vec<TranscribedItem> },
    Click { coord: GridCoord },
    Color { color: ColorId },
    Commands { commands: Vec<UnitCommand> },
    Arena { action: ArenaAction },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionEnvelope {
    pub game_id: GameId,
    pub payload: ActionPayload,
    /// The agent's literal reply, kept for audit.
    pub raw_text: String,
    pub valid: bool,
}

impl ActionEnvelope {
    pub fn valid(game_id: GameId, payload: ActionPayload, raw_text: &str) -> Self {
        Self {
            game_id,
            payload,
            raw_text: raw_text.to_string(),
            valid: true,
        }
    }

    /// Invalid replies always carry the no-op payload.
    pub fn invalid(game_id: GameId, raw_text: &str) -> Self {
        Self {
            game_id,
            payload: ActionPayload::NoOp,
            raw_text: raw_text.to_string(),
            valid: false,
        }
    }
}

/// The discrete action menu a baseline agent samples from. Entries are
/// action bodies; agents prefix each emitted line with `ACTION:`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "spec", rename_all = "snake_case")]
pub enum ActionSpace {
    /// Pick one entry.
    Discrete(Vec<String>),
    /// Emit `prefix` followed by `length` entries drawn with replacement.
    Sequence {
        prefix: String,
        choices: Vec<String>,
        length: usize,
    },
    /// One line per unit, one entry from each list.
    PerUnit(Vec<Vec<String>>),
}
