//! Batch episode execution.

use std::fmt::Write as _;
use std::path::Path;

use omniplay::metrics::{report, score_records};
use omniplay::{create_env, run_episode, EnvDescriptor, EpisodeRecord};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::seeds::SeedManifest;
use crate::store;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlannedEpisode {
    pub index: usize,
    pub descriptor: EnvDescriptor,
}

pub fn manifest_for(cfg: &RunConfig) -> Result<SeedManifest> {
    let manifest = match &cfg.seeds {
        Some(path) => SeedManifest::load(path)?,
        None => SeedManifest::builtin(cfg.game),
    };
    if manifest.game != cfg.game {
        return Err(HarnessError::Config(format!(
            "seed manifest is for {}, config runs {}",
            manifest.game, cfg.game
        )));
    }
    Ok(manifest)
}

/// One descriptor per manifest seed, in manifest order.
pub fn plan(cfg: &RunConfig, manifest: &SeedManifest) -> Result<Vec<PlannedEpisode>> {
    manifest
        .take(cfg.episode_count())?
        .iter()
        .enumerate()
        .map(|(index, &seed)| {
            let mut descriptor = EnvDescriptor::new(cfg.game, cfg.difficulty, seed)?;
            if let Some(cap) = cfg.step_cap {
                descriptor = descriptor.with_step_cap(cap)?;
            }
            Ok(PlannedEpisode { index, descriptor })
        })
        .collect()
}

pub fn describe_plan(cfg: &RunConfig, manifest: &SeedManifest, plan: &[PlannedEpisode]) -> String {
    let mut out = format!(
        "{} {} | agent {} | condition {} | {} episodes | manifest {} | concurrency {} | out {}\n",
        cfg.game,
        cfg.difficulty,
        cfg.agent.agent_id(),
        cfg.intervention.as_ref().map_or("baseline", |i| i.name()),
        plan.len(),
        manifest.digest().short(),
        cfg.concurrency,
        cfg.out.display(),
    );
    for p in plan {
        let _ = writeln!(
            out,
            "  #{:03} seed {} step_cap {}",
            p.index, p.descriptor.seed, p.descriptor.step_cap
        );
    }
    out
}

/// Runs the plan on a pool of `concurrency` workers. Records come back in
/// plan order regardless of completion order.
pub fn execute(cfg: &RunConfig, plan: &[PlannedEpisode]) -> Result<Vec<EpisodeRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.concurrency)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    pool.install(|| {
        plan.par_iter()
            .map(|p| {
                let mut agent = cfg.agent.connector(cfg.game)?;
                let env = create_env(p.descriptor)?;
                Ok(run_episode(env, agent.as_mut(), cfg.intervention.clone())?)
            })
            .collect()
    })
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub records: Vec<EpisodeRecord>,
    pub report: String,
}

/// Executes a run and writes `episodes.jsonl`, the resolved `run.toml`,
/// and score reports into `cfg.out`.
pub fn run(cfg: &RunConfig, force: bool) -> Result<RunSummary> {
    let manifest = manifest_for(cfg)?;
    let plan = plan(cfg, &manifest)?;
    store::prepare_output(&cfg.out, force)?;
    store::write_text(&cfg.out.join("run.toml"), &cfg.to_toml())?;
    let records = execute(cfg, &plan)?;
    store::write_jsonl(&cfg.out.join(store::EPISODES_FILE), &records)?;
    let reports = score_records(&records)?;
    let text = report::score_tables(&reports);
    store::write_text(&cfg.out.join("scores.txt"), &text)?;
    store::write_json(&cfg.out.join("scores.json"), &reports)?;
    if cfg.save_assets {
        for (p, r) in plan.iter().zip(&records) {
            store::export_assets(r, &assets_dir(&cfg.out, p.index))?;
        }
    }
    Ok(RunSummary {
        records,
        report: text,
    })
}

pub fn assets_dir(out: &Path, index: usize) -> std::path::PathBuf {
    out.join("assets").join(format!("episode_{index:03}"))
}
