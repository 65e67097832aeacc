use super::{AgentConnector, AgentError, AgentRequest, Capabilities};
use crate::engine::EnvDescriptor;

/// Replays a fixed list of replies, optionally failing after a number of turns.
pub struct ScriptedAgent {
    id: String,
    replies: Vec<String>,
    next: usize,
    fail_after: Option<usize>,
}

impl ScriptedAgent {
    /// Cycles through `replies`.
    pub fn new(id: impl Into<String>, replies: Vec<String>) -> Self {
        assert!(
            !replies.is_empty(),
            "scripted agent needs at least one reply"
        );
        Self {
            id: id.into(),
            replies,
            next: 0,
            fail_after: None,
        }
    }

    pub fn repeating(id: impl Into<String>, reply: &str) -> Self {
        Self::new(id, vec![reply.to_string()])
    }

    /// Returns a transport error from turn `n` (0-based) of each episode on.
    pub fn failing_after(mut self, n: usize) -> Self {
        self.fail_after = Some(n);
        self
    }
}

impl AgentConnector for ScriptedAgent {
    fn agent_id(&self) -> &str {
        &self.id
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            channels: Vec::new(),
            privileged: false,
        }
    }

    fn begin_episode(&mut self, _descriptor: &EnvDescriptor, _seat: usize) {
        self.next = 0;
    }

    fn act(&mut self, _request: &AgentRequest<'_>) -> Result<String, AgentError> {
        if self.fail_after.is_some_and(|n| self.next >= n) {
            return Err(AgentError::Transport("scripted failure".into()));
        }
        let reply = self.replies[self.next % self.replies.len()].clone();
        self.next += 1;
        Ok(reply)
    }
}

/// Never produces a parseable action.
pub struct GibberishAgent {
    id: String,
}

impl GibberishAgent {
    pub fn new(id: impl Into<String>) -> Self {
        Self { id: id.into() }
    }
}

impl AgentConnector for GibberishAgent {
    fn agent_id(&self) -> &str {
        &self.id
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            channels: Vec::new(),
            privileged: false,
        }
    }

    fn begin_episode(&mut self, _descriptor: &EnvDescriptor, _seat: usize) {}

    fn act(&mut self, _request: &AgentRequest<'_>) -> Result<String, AgentError> {
        Ok("I am not sure what to do here. Perhaps the purple one?".into())
    }
}
