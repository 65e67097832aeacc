use rand::Rng;

use super::{AgentConnector, AgentError, AgentRequest, Capabilities};
use crate::engine::{ActionSpace, EnvDescriptor};
use crate::rng::{keyed, StreamRng, Substream};

/// Uniform sampler over the environment's action menu.
pub struct RandomAgent {
    id: String,
    rng: StreamRng,
}

impl RandomAgent {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            rng: keyed(0, Substream::Agent.label(), 0),
        }
    }

    pub fn sample(&mut self, space: &ActionSpace) -> String {
        let mut pick = |opts: &[String]| opts[self.rng.random_range(0..opts.len())].clone();
        match space {
            ActionSpace::Discrete(opts) => format!("ACTION: {}", pick(opts)),
            ActionSpace::Sequence {
                prefix,
                choices,
                length,
            } => {
                let items: Vec<String> = (0..*length).map(|_| pick(choices)).collect();
                format!("ACTION: {prefix} {}", items.join(" "))
            }
            ActionSpace::PerUnit(per_unit) => per_unit
                .iter()
                .map(|opts| format!("ACTION: {}", pick(opts)))
                .collect::<Vec<_>>()
                .join("\n"),
        }
    }
}

impl AgentConnector for RandomAgent {
    fn agent_id(&self) -> &str {
        &self.id
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            channels: Vec::new(),
            privileged: false,
        }
    }

    fn begin_episode(&mut self, descriptor: &EnvDescriptor, seat: usize) {
        self.rng = keyed(descriptor.seed, Substream::Agent.label(), seat as u64);
    }

    fn act(&mut self, request: &AgentRequest<'_>) -> Result<String, AgentError> {
        Ok(self.sample(request.action_space))
    }
}
