use serde::{Deserialize, Serialize};

use super::{create_env, EpisodeDriver, EpisodeRecord, Outcome, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::interventions::InterventionConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayResult {
    #[serde(rename = "match")]
    pub matched: bool,
    pub divergence_step: Option<u32>,
}

impl ReplayResult {
    fn diverged(step: usize) -> Self {
        Self {
            matched: false,
            divergence_step: Some(step as u32),
        }
    }
}

/// Re-simulates a record from its seed and recorded actions.
pub fn replay(record: &EpisodeRecord) -> Result<ReplayResult> {
    replay_with(record, record.intervention.clone())
}

/// Replays under a caller-chosen intervention instead of the recorded one.
///
/// At every step the recomputed observation digest, the re-parsed reply and
/// the post-transition world digest must all match the record.
pub fn replay_with(
    record: &EpisodeRecord,
    intervention: Option<InterventionConfig>,
) -> Result<ReplayResult> {
    if record.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: record.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    let env = create_env(record.descriptor)?;
    let mut driver = EpisodeDriver::new(env, intervention)?;
    if driver.world_digest() != record.initial_world_digest {
        return Ok(ReplayResult::diverged(0));
    }
    for (i, step) in record.steps.iter().enumerate() {
        if driver.is_done() {
            return Ok(ReplayResult::diverged(i));
        }
        if driver.observation().digest() != step.observation.digest {
            return Ok(ReplayResult::diverged(i));
        }
        if driver.parse(&step.action.raw_text) != step.action {
            return Ok(ReplayResult::diverged(i));
        }
        driver.submit_envelope(step.action.clone());
        if driver.world_digest() != step.world_digest {
            return Ok(ReplayResult::diverged(i));
        }
    }
    let consistent_end = match record.outcome {
        Outcome::Aborted => true,
        recorded => driver.outcome() == Some(recorded),
    };
    if !consistent_end {
        return Ok(ReplayResult::diverged(record.steps.len()));
    }
    Ok(ReplayResult {
        matched: true,
        divergence_step: None,
    })
}
