use std::time::Instant;

use super::{
    ActionEnvelope, ActionSpace, EnvDescriptor, Environment, EpisodeRecord, ObservationBundle,
    Outcome, Privileged, Status, StepRecord, SCHEMA_VERSION,
};
use crate::agents::{AgentConnector, AgentRequest, HistoryEntry};
use crate::digest::Digest;
use crate::error::Result;
use crate::interventions::{self, InterventionConfig, InterventionContext};

/// Number of past (prompt, reply) pairs handed to agents.
pub const HISTORY_WINDOW: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub step_index: u32,
    pub valid: bool,
    pub note: String,
    pub done: bool,
    pub outcome: Option<Outcome>,
}

/// Step-wise episode loop: observe, transform, accept one reply, transition.
///
/// `run_episode` drives it with a connector; the session service drives it
/// with actions posted over HTTP.
pub struct EpisodeDriver {
    env: Box<dyn Environment>,
    intervention: Option<InterventionConfig>,
    system_prompt: String,
    initial_world: Digest,
    steps: Vec<StepRecord>,
    history: Vec<HistoryEntry>,
    current: Option<ObservationBundle>,
    started: Instant,
}

impl EpisodeDriver {
    pub fn new(
        mut env: Box<dyn Environment>,
        intervention: Option<InterventionConfig>,
    ) -> Result<Self> {
        if let Some(cfg) = &intervention {
            cfg.check_applicable(env.descriptor().game_id)?;
            if matches!(cfg, InterventionConfig::Simplified {}) {
                env.set_simplified()?;
            }
        }
        let system_prompt = env.system_prompt();
        let initial_world = env.world_digest();
        Ok(Self {
            env,
            intervention,
            system_prompt,
            initial_world,
            steps: Vec::new(),
            history: Vec::new(),
            current: None,
            started: Instant::now(),
        })
    }

    pub fn descriptor(&self) -> &EnvDescriptor {
        self.env.descriptor()
    }

    pub fn intervention(&self) -> Option<&InterventionConfig> {
        self.intervention.as_ref()
    }

    pub fn system_prompt(&self) -> &str {
        &self.system_prompt
    }

    pub fn step_index(&self) -> u32 {
        self.steps.len() as u32
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn world_digest(&self) -> Digest {
        self.env.world_digest()
    }

    pub fn action_space(&self) -> ActionSpace {
        self.env.action_space()
    }

    pub fn privileged(&self) -> Privileged {
        self.env.privileged()
    }

    pub fn env(&self) -> &dyn Environment {
        self.env.as_ref()
    }

    pub fn is_done(&self) -> bool {
        self.outcome().is_some()
    }

    pub fn outcome(&self) -> Option<Outcome> {
        match self.env.status() {
            Status::Finished(o) => Some(o),
            Status::Running if self.steps.len() as u32 >= self.descriptor().step_cap => {
                Some(Outcome::StepCapHit)
            }
            Status::Running => None,
        }
    }

    /// The (intervened) observation for the current step. Computed once per
    /// step and cached.
    pub fn observation(&mut self) -> &ObservationBundle {
        if self.current.is_none() {
            let mut obs = self.env.observe();
            obs.step_index = self.step_index();
            if let Some(cfg) = &self.intervention {
                let ctx = InterventionContext {
                    game: self.env.descriptor().game_id,
                    seed: self.env.descriptor().seed,
                    step_index: obs.step_index,
                    aided_hint: self.env.aided_hint(),
                };
                obs = interventions::apply(cfg, obs, &ctx);
            }
            self.current = Some(obs);
        }
        self.current.as_ref().expect("observation cached")
    }

    pub fn parse(&self, raw: &str) -> ActionEnvelope {
        self.env.parse_action(raw)
    }

    pub fn submit(&mut self, raw: &str) -> StepReport {
        let envelope = self.env.parse_action(raw);
        self.submit_envelope(envelope)
    }

    pub fn submit_envelope(&mut self, envelope: ActionEnvelope) -> StepReport {
        let obs_ref = self.observation().to_ref();
        let step_index = self.step_index();
        let transition_note = self.env.apply(&envelope);
        self.current = None;

        self.history.push(HistoryEntry {
            step_index,
            prompt: obs_ref.prompt.clone(),
            reply: envelope.raw_text.clone(),
        });
        if self.history.len() > HISTORY_WINDOW {
            let excess = self.history.len() - HISTORY_WINDOW;
            self.history.drain(..excess);
        }

        let valid = envelope.valid;
        self.steps.push(StepRecord {
            step_index,
            observation: obs_ref,
            action: envelope,
            transition_note: transition_note.clone(),
            world_digest: self.env.world_digest(),
        });
        let outcome = self.outcome();
        StepReport {
            step_index,
            valid,
            note: transition_note,
            done: outcome.is_some(),
            outcome,
        }
    }

    fn build(self, agent_id: &str, outcome: Outcome, note: Option<String>) -> EpisodeRecord {
        let mut raw_metrics = self.env.raw_metrics();
        raw_metrics.insert("steps".into(), self.steps.len() as f64);
        raw_metrics.insert(
            "invalid".into(),
            self.steps.iter().filter(|s| !s.action.valid).count() as f64,
        );
        EpisodeRecord {
            schema_version: SCHEMA_VERSION,
            descriptor: *self.env.descriptor(),
            intervention: self.intervention,
            agent_id: agent_id.to_string(),
            initial_world_digest: self.initial_world,
            steps: self.steps,
            outcome,
            raw_metrics,
            note,
            wall_clock_ms: self.started.elapsed().as_millis() as u64,
        }
    }

    /// Closes a finished episode. Calling this early marks it aborted.
    pub fn finish(self, agent_id: &str) -> EpisodeRecord {
        match self.outcome() {
            Some(outcome) => self.build(agent_id, outcome, None),
            None => self.build(
                agent_id,
                Outcome::Aborted,
                Some("closed before the episode finished".into()),
            ),
        }
    }

    pub fn abort(self, agent_id: &str, note: impl Into<String>) -> EpisodeRecord {
        self.build(agent_id, Outcome::Aborted, Some(note.into()))
    }
}

/// Closed loop over one environment with one connector.
///
/// Only configuration errors surface as `Err`; a connector failure ends the
/// episode with `Outcome::Aborted` and the error text in `note`.
pub fn run_episode(
    env: Box<dyn Environment>,
    agent: &mut dyn AgentConnector,
    intervention: Option<InterventionConfig>,
) -> Result<EpisodeRecord> {
    let mut driver = EpisodeDriver::new(env, intervention)?;
    agent.begin_episode(driver.descriptor(), 0);
    let privileged = agent.capabilities().privileged;
    while !driver.is_done() {
        driver.observation();
        let space = driver.action_space();
        let truth = privileged.then(|| driver.privileged());
        let request = AgentRequest {
            descriptor: driver.descriptor(),
            seat: 0,
            system_prompt: driver.system_prompt(),
            observation: driver.current.as_ref().expect("observation prepared"),
            history: driver.history(),
            action_space: &space,
            privileged: truth.as_ref(),
        };
        match agent.act(&request) {
            Ok(reply) => {
                driver.submit(&reply);
            }
            Err(err) => {
                let id = agent.agent_id().to_string();
                return Ok(driver.abort(&id, format!("agent failure: {err}")));
            }
        }
    }
    Ok(driver.finish(agent.agent_id()))
}
