//! Batch runs, tournaments, scoring and the live-play service on top of
//! the `omniplay` environments.

pub mod attachments;
pub mod config;
pub mod error;
pub mod remote;
pub mod runner;
pub mod score;
pub mod seeds;
pub mod service;
pub mod store;
pub mod tournament;

pub use config::{AgentSpec, RunConfig, TournamentConfig};
pub use error::{HarnessError, Result};
pub use seeds::SeedManifest;
