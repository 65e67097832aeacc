//! TOML run and tournament configuration.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use omniplay::agents::{self, AgentConnector, AgentRequest, Capabilities};
use omniplay::{Difficulty, EnvDescriptor, GameId, InterventionConfig};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, HarnessError, Result};
use crate::remote::{RemoteAgent, RemoteConfig};

fn default_concurrency() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub game: GameId,
    pub difficulty: Difficulty,
    /// Defaults to the game's standard episode count.
    #[serde(default)]
    pub episodes: Option<usize>,
    /// Seed manifest path; the shipped manifest when absent.
    #[serde(default)]
    pub seeds: Option<PathBuf>,
    pub agent: AgentSpec,
    #[serde(default)]
    pub intervention: Option<InterventionConfig>,
    pub out: PathBuf,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    #[serde(default)]
    pub save_assets: bool,
    #[serde(default)]
    pub step_cap: Option<u32>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn episode_count(&self) -> usize {
        self.episodes.unwrap_or(self.game.default_episodes())
    }

    pub fn validate(&self) -> Result<()> {
        let probe = EnvDescriptor::new(self.game, self.difficulty, 0)?;
        if let Some(cap) = self.step_cap {
            probe.with_step_cap(cap)?;
        }
        if self.episode_count() == 0 {
            return Err(HarnessError::Config("episodes must be at least 1".into()));
        }
        if self.concurrency == 0 {
            return Err(HarnessError::Config(
                "concurrency must be at least 1".into(),
            ));
        }
        if let Some(cfg) = &self.intervention {
            cfg.validate()?;
            cfg.check_applicable(self.game)?;
        }
        self.agent.validate(self.game)
    }
}

/// Which policy plays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentSpec {
    Builtin {
        name: String,
        /// Logged agent id; the builtin name when absent.
        #[serde(default)]
        id: Option<String>,
    },
    Remote(RemoteConfig),
}

impl AgentSpec {
    pub fn agent_id(&self) -> &str {
        match self {
            AgentSpec::Builtin { name, id } => id.as_deref().unwrap_or(name),
            AgentSpec::Remote(cfg) => &cfg.id,
        }
    }

    pub fn validate(&self, game: GameId) -> Result<()> {
        match self {
            AgentSpec::Builtin { name, .. } => {
                if agents::builtin(name, game).is_none() {
                    return Err(HarnessError::Config(format!(
                        "unknown builtin agent {name:?} for {game} (known: {})",
                        agents::BUILTIN_NAMES.join(", ")
                    )));
                }
                Ok(())
            }
            AgentSpec::Remote(cfg) => cfg.validate(),
        }
    }

    /// A fresh connector; one per episode.
    pub fn connector(&self, game: GameId) -> Result<Box<dyn AgentConnector>> {
        match self {
            AgentSpec::Builtin { name, id } => {
                let inner = agents::builtin(name, game).ok_or_else(|| {
                    HarnessError::Config(format!("unknown builtin agent {name:?}"))
                })?;
                Ok(match id {
                    Some(id) if id != inner.agent_id() => Box::new(Renamed {
                        inner,
                        id: id.clone(),
                    }),
                    _ => inner,
                })
            }
            AgentSpec::Remote(cfg) => Ok(Box::new(RemoteAgent::new(cfg.clone())?)),
        }
    }
}

/// A connector logged under a different id.
struct Renamed {
    inner: Box<dyn AgentConnector>,
    id: String,
}

impl AgentConnector for Renamed {
    fn agent_id(&self) -> &str {
        &self.id
    }

    fn capabilities(&self) -> Capabilities {
        self.inner.capabilities()
    }

    fn begin_episode(&mut self, descriptor: &EnvDescriptor, seat: usize) {
        self.inner.begin_episode(descriptor, seat);
    }

    fn act(
        &mut self,
        request: &AgentRequest<'_>,
    ) -> std::result::Result<String, agents::AgentError> {
        self.inner.act(request)
    }
}

fn default_games() -> usize {
    50
}

fn default_tick_cap() -> u32 {
    omniplay::games::showdown::TICK_CAP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TournamentConfig {
    #[serde(default = "default_games")]
    pub games: usize,
    /// Seed manifest path; the shipped arena manifest when absent.
    #[serde(default)]
    pub seeds: Option<PathBuf>,
    #[serde(default)]
    pub seating_seed: u64,
    #[serde(default = "default_tick_cap")]
    pub tick_cap: u32,
    pub out: PathBuf,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    pub agents: Vec<AgentSpec>,
}

impl TournamentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("tournament config serializes")
    }

    pub fn agent_ids(&self) -> Vec<String> {
        self.agents
            .iter()
            .map(|a| a.agent_id().to_string())
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.agents.len() < omniplay::games::showdown::PLAYERS {
            return Err(HarnessError::Config(format!(
                "a tournament needs at least {} agents",
                omniplay::games::showdown::PLAYERS
            )));
        }
        let ids: BTreeSet<String> = self.agent_ids().into_iter().collect();
        if ids.len() != self.agents.len() {
            return Err(HarnessError::Config("agent ids must be unique".into()));
        }
        if self.games == 0 || self.concurrency == 0 || self.tick_cap == 0 {
            return Err(HarnessError::Config(
                "games, concurrency and tick_cap must be positive".into(),
            ));
        }
        for agent in &self.agents {
            agent.validate(GameId::Showdown)?;
        }
        Ok(())
    }
}
