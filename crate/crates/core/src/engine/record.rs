use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ActionEnvelope, EnvDescriptor, ObservationRef};
use crate::digest::{ContentHasher, Digest};
use crate::interventions::InterventionConfig;

pub const SCHEMA_VERSION: u32 = 1;

pub type MetricMap = BTreeMap<String, f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    GoalReached,
    StepCapHit,
    Eliminated,
    Aborted,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::GoalReached => "goal_reached",
            Outcome::StepCapHit => "step_cap_hit",
            Outcome::Eliminated => "eliminated",
            Outcome::Aborted => "aborted",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step_index: u32,
    pub observation: ObservationRef,
    pub action: ActionEnvelope,
    pub transition_note: String,
    /// World digest after the transition.
    pub world_digest: Digest,
}

/// A full trajectory. Together with the crate version it is enough to
/// re-simulate the episode deterministically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub schema_version: u32,
    pub descriptor: EnvDescriptor,
    #[serde(default)]
    pub intervention: Option<InterventionConfig>,
    pub agent_id: String,
    pub initial_world_digest: Digest,
    pub steps: Vec<StepRecord>,
    pub outcome: Outcome,
    pub raw_metrics: MetricMap,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Wall-clock duration in milliseconds. Excluded from [`digest`].
    ///
    /// [`digest`]: EpisodeRecord::digest
    pub wall_clock_ms: u64,
}

impl EpisodeRecord {
    /// Content digest over everything except wall-clock time.
    pub fn digest(&self) -> Digest {
        let mut canonical = self.clone();
        canonical.wall_clock_ms = 0;
        let mut h = ContentHasher::new("episode-record");
        h.json(&canonical);
        h.finish()
    }

    pub fn invalid_count(&self) -> usize {
        self.steps.iter().filter(|s| !s.action.valid).count()
    }

    pub fn is_aborted(&self) -> bool {
        self.outcome == Outcome::Aborted
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.raw_metrics.get(name).copied()
    }
}
