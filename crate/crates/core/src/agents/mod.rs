//! The connector boundary between environments and policies, plus built-in
//! agents: the uniform random baseline, per-game oracles and scripted
//! stand-ins for tests.

mod oracle;
mod random;
mod scripted;

use crate::engine::{ActionSpace, EnvDescriptor, GameId, Modality, ObservationBundle, Privileged};

pub use oracle::{
    oracle_agent, EchoesOracle, MelodyDeducer, MelodyPerfect, PathfindingOracle, PhantomPlanner,
    ShowdownSurvivor,
};
pub use random::RandomAgent;
pub use scripted::{GibberishAgent, ScriptedAgent};

/// One past turn as the agent saw it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistoryEntry {
    pub step_index: u32,
    pub prompt: String,
    pub reply: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Capabilities {
    pub channels: Vec<Modality>,
    /// Receives ground truth alongside observations.
    pub privileged: bool,
}

impl Capabilities {
    pub fn all_channels() -> Vec<Modality> {
        vec![
            Modality::Image,
            Modality::Video,
            Modality::Audio,
            Modality::Text,
        ]
    }
}

pub struct AgentRequest<'a> {
    pub descriptor: &'a EnvDescriptor,
    pub seat: usize,
    pub system_prompt: &'a str,
    pub observation: &'a ObservationBundle,
    /// Most recent turns, oldest first.
    pub history: &'a [HistoryEntry],
    pub action_space: &'a ActionSpace,
    pub privileged: Option<&'a Privileged>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AgentError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("protocol error: {0}")]
    Protocol(String),
}

/// A policy reachable through text replies.
///
/// Connectors may keep memory within an episode; `begin_episode` resets it.
pub trait AgentConnector: Send {
    fn agent_id(&self) -> &str;
    fn capabilities(&self) -> Capabilities;
    fn begin_episode(&mut self, descriptor: &EnvDescriptor, seat: usize);
    fn act(&mut self, request: &AgentRequest<'_>) -> Result<String, AgentError>;
}

/// Built-in agent by name: `random`, `oracle`, `oracle-perfect` (melody),
/// `gibberish` or `passive`.
pub fn builtin(name: &str, game: GameId) -> Option<Box<dyn AgentConnector>> {
    Some(match name {
        "random" => Box::new(RandomAgent::new("random")),
        "oracle" => oracle_agent(game),
        "oracle-perfect" if game == GameId::Melody => Box::new(MelodyPerfect),
        "gibberish" => Box::new(GibberishAgent::new("gibberish")),
        "passive" => Box::new(ScriptedAgent::repeating("passive", "ACTION: wait")),
        _ => return None,
    })
}

pub const BUILTIN_NAMES: [&str; 5] = ["random", "oracle", "oracle-perfect", "gibberish", "passive"];
