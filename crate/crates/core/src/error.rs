use crate::engine::{Difficulty, GameId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown game id `{0}`")]
    UnknownGame(String),
    #[error("unknown difficulty `{0}`")]
    UnknownDifficulty(String),
    #[error("difficulty {difficulty} is not supported for {game}")]
    UnsupportedDifficulty {
        game: GameId,
        difficulty: Difficulty,
    },
    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("intervention `{intervention}` does not apply to {game}")]
    InterventionNotApplicable { intervention: String, game: GameId },
    #[error("invalid intervention: {0}")]
    InvalidIntervention(String),
    #[error("missing value for prompt placeholder `{0}`")]
    MissingPlaceholder(String),
    #[error("unknown note id {0}")]
    UnknownNote(u8),
    #[error("episode has no steps to score")]
    EmptyEpisode,
    #[error("trimmed mean needs at least 3 values, got {0}")]
    TooFewValues(usize),
    #[error("degenerate baselines: human score {human} equals random score {random}")]
    DegenerateBaselines { human: f64, random: f64 },
    #[error("reliability analysis needs {expected} players, got {got}")]
    PlayerCount { expected: usize, got: usize },
    #[error("missing raw metric `{0}`")]
    MissingMetric(String),
    #[error("schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("missing asset {0}")]
    MissingAsset(String),
    #[error("tournament needs at least 4 agents, got {0}")]
    TooFewAgents(usize),
    #[error("image encoding failed: {0}")]
    Image(#[from] image::ImageError),
    #[error("audio encoding failed: {0}")]
    Audio(#[from] hound::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
