//! Seeded omni-modal game environments and the machinery around them.
//!
//! The crate hosts five turn-based games behind one [`engine::Environment`]
//! contract, the observation pipeline that renders frames, video, audio and
//! prompts, the diagnostic [`interventions`], built-in [`agents`], and the
//! scoring engine in [`metrics`].

pub mod agents;
pub mod digest;
pub mod engine;
pub mod error;
pub mod games;
pub mod grammar;
pub mod interventions;
pub mod metrics;
pub mod render;
pub mod rng;

pub use engine::{
    create_env, replay, replay_with, run_episode, ActionEnvelope, ActionPayload, AudioKind,
    AudioPayload, Difficulty, EnvDescriptor, Environment, EpisodeDriver, EpisodeRecord, GameId,
    Modality, ObservationBundle, Outcome, ReplayResult,
};
pub use error::{Error, Result};
pub use interventions::InterventionConfig;
