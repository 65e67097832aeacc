use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use omniplay::{replay, EpisodeRecord};
use omniplay_harness::{runner, score, store, tournament, RunConfig, TournamentConfig};

#[derive(Parser)]
#[command(
    name = "omniplay",
    version,
    about = "Run, score and serve omni-modal game episodes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct BatchFlags {
    /// TOML config file.
    #[arg(long)]
    config: PathBuf,
    /// Seed manifest overriding the config.
    #[arg(long)]
    seeds: Option<PathBuf>,
    /// Output directory overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite existing results.
    #[arg(long)]
    force: bool,
    /// Print the plan and write nothing.
    #[arg(long)]
    dry_run: bool,
    #[arg(long)]
    concurrency: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Play a batch of episodes with one agent.
    Run(BatchFlags),
    /// Recompute score, NPS, reliability and tournament reports from logs.
    Score {
        /// Log files or directories searched recursively.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Play a four-seat arena tournament, resuming partial logs.
    Tournament(BatchFlags),
    /// Serve live human sessions over HTTP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        /// Directory for human and warm-up logs.
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-simulate logged episodes and check they match.
    Replay {
        log: PathBuf,
        /// Write per-step observation assets for each episode here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run_cmd(flags: BatchFlags) -> anyhow::Result<()> {
    let mut cfg = RunConfig::load(&flags.config)?;
    if let Some(s) = flags.seeds {
        cfg.seeds = Some(s);
    }
    if let Some(o) = flags.out {
        cfg.out = o;
    }
    if let Some(c) = flags.concurrency {
        cfg.concurrency = c;
    }
    cfg.validate()?;
    if flags.dry_run {
        let manifest = runner::manifest_for(&cfg)?;
        let plan = runner::plan(&cfg, &manifest)?;
        print!("{}", runner::describe_plan(&cfg, &manifest, &plan));
        return Ok(());
    }
    let summary = runner::run(&cfg, flags.force)?;
    let aborted = summary.records.iter().filter(|r| r.is_aborted()).count();
    println!(
        "{} episodes written to {} ({aborted} aborted)",
        summary.records.len(),
        cfg.out.display()
    );
    print!("{}", summary.report);
    Ok(())
}

fn tournament_cmd(flags: BatchFlags) -> anyhow::Result<()> {
    let mut cfg = TournamentConfig::load(&flags.config)?;
    if let Some(s) = flags.seeds {
        cfg.seeds = Some(s);
    }
    if let Some(o) = flags.out {
        cfg.out = o;
    }
    if let Some(c) = flags.concurrency {
        cfg.concurrency = c;
    }
    cfg.validate()?;
    if flags.dry_run {
        let schedule = tournament::schedule(&cfg)?;
        print!("{}", tournament::describe_schedule(&cfg, &schedule));
        return Ok(());
    }
    let summary = tournament::run(&cfg, flags.force)?;
    println!(
        "{} matches ({} resumed, {} played) in {}",
        summary.matches.len(),
        summary.resumed,
        summary.played,
        cfg.out.display()
    );
    print!("{}", summary.report);
    Ok(())
}

fn replay_cmd(log: PathBuf, out: Option<PathBuf>) -> anyhow::Result<bool> {
    let records: Vec<EpisodeRecord> = store::read_jsonl(&log)?;
    let mut all_match = true;
    for (i, r) in records.iter().enumerate() {
        let result = replay(r).with_context(|| format!("episode {i}"))?;
        all_match &= result.matched;
        let verdict = match result.divergence_step {
            None => "match".to_string(),
            Some(s) => format!("DIVERGED at step {s}"),
        };
        println!(
            "#{i:03} {} {} seed {} {} steps {} {}",
            r.descriptor.game_id,
            r.descriptor.difficulty,
            r.descriptor.seed,
            r.agent_id,
            r.steps.len(),
            verdict
        );
        if let Some(dir) = &out {
            store::export_assets(r, &runner::assets_dir(dir, i))?;
        }
    }
    Ok(all_match)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(flags) => run_cmd(flags).map(|_| true),
        Command::Tournament(flags) => tournament_cmd(flags).map(|_| true),
        Command::Score { inputs, out } => score::score(&inputs, &out)
            .map(|o| {
                println!(
                    "{} score groups, {} NPS rows written to {}",
                    o.reports.len(),
                    o.nps.len(),
                    out.display()
                );
                true
            })
            .map_err(Into::into),
        Command::Serve { bind, out } => tokio::runtime::Runtime::new()
            .map_err(anyhow::Error::from)
            .and_then(|rt| {
                println!("serving on http://{bind}");
                rt.block_on(omniplay_harness::service::serve(bind, &out))
            })
            .map(|_| true),
        Command::Replay { log, out } => replay_cmd(log, out),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
