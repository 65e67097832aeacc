//! One line per headline criterion, with its runtime against its budget.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use omniplay::agents::{
    builtin, oracle_agent, AgentConnector, GibberishAgent, RandomAgent, ScriptedAgent,
};
use omniplay::games::phantom::score::{phantom_score, score_ceiling, ScoreInputs};
use omniplay::games::showdown::tournament::{MatchResult, PlayerResult};
use omniplay::interventions::{
    apply, apply_audio_noise, apply_image_noise, AudioNoise, Channel, ImageNoise,
    InterventionContext,
};
use omniplay::metrics::{nps, nps_table, score_records, tournament_table, trimmed_mean};
use omniplay::render::raster::canvas;
use omniplay::rng::{keyed, substream_at, Substream};
use omniplay::{
    create_env, replay, run_episode, Difficulty, EnvDescriptor, EpisodeDriver, EpisodeRecord,
    GameId, InterventionConfig,
};
use omniplay_harness::SeedManifest;
use rand::Rng;

type Check = std::result::Result<String, String>;

/// Name, runtime budget, check.
type Criterion = (&'static str, Duration, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn play(
    game: GameId,
    difficulty: Difficulty,
    seed: u64,
    agent: &mut dyn AgentConnector,
) -> EpisodeRecord {
    play_with(game, difficulty, seed, agent, None)
}

fn play_with(
    game: GameId,
    difficulty: Difficulty,
    seed: u64,
    agent: &mut dyn AgentConnector,
    iv: Option<InterventionConfig>,
) -> EpisodeRecord {
    let env = create_env(EnvDescriptor::new(game, difficulty, seed).unwrap()).unwrap();
    run_episode(env, agent, iv).unwrap()
}

fn tasks() -> Vec<(GameId, Difficulty)> {
    GameId::ALL
        .iter()
        .flat_map(|&g| g.difficulties().iter().map(move |&d| (g, d)))
        .collect()
}

fn scripted(game: GameId) -> ScriptedAgent {
    let replies: &[&str] = match game {
        GameId::Pathfinding => &[
            "ACTION: rotate 90 move 1",
            "ACTION: rotate 0 move 1",
            "lost",
        ],
        GameId::Echoes => &[
            "ACTION: sequence (0,0,star) (1,1,moon)",
            "ACTION: click 0 0",
            "ACTION: click 1 1",
        ],
        GameId::Melody => &["ACTION: click red", "ACTION: click blue", "nothing"],
        GameId::Phantom => &[
            "ACTION: move U1 3 3\nACTION: scout U2",
            "ACTION: capture U1",
        ],
        GameId::Showdown => &[
            "ACTION: up",
            "ACTION: bomb",
            "ACTION: left",
            "ACTION: wait",
            "???",
        ],
    };
    ScriptedAgent::new("scripted", replies.iter().map(|s| s.to_string()).collect())
}

fn synthetic(
    game: GameId,
    difficulty: Difficulty,
    agent: &str,
    metrics: &[(&str, f64)],
) -> EpisodeRecord {
    let mut rec = play(game, difficulty, 1, &mut RandomAgent::new(agent));
    rec.agent_id = agent.into();
    rec.raw_metrics = metrics.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    rec
}

fn nps_golden() -> Check {
    let echoes = |agent: &str, score, coord, icon| {
        synthetic(
            GameId::Echoes,
            Difficulty::Hard,
            agent,
            &[
                ("score", score),
                ("coord_acc", coord),
                ("icon_acc", icon),
                ("success", 0.0),
                ("parse_failed", 0.0),
            ],
        )
    };
    let records = vec![
        echoes("model", 10.2, 13.5, 13.5),
        echoes("human", 2.6, 2.3, 4.6),
        echoes("random", 0.1, 0.07, 0.03),
    ];
    let reports = score_records(&records).map_err(|e| e.to_string())?;
    let table = nps_table(&reports, "human", "random").map_err(|e| e.to_string())?;
    let model = table
        .iter()
        .find(|e| e.agent_id == "model")
        .ok_or("no model entry")?
        .nps;
    ensure((model - 399.2).abs() <= 0.1, || format!("nps {model}"))?;
    Ok(format!("nps {model:.2}"))
}

/// Agent, games, wins, kills, deaths.
const TOURNAMENT: [(&str, u32, u32, u32, u32); 6] = [
    ("alpha", 36, 13, 93, 39),
    ("bravo", 38, 11, 68, 41),
    ("charlie", 31, 6, 0, 72),
    ("delta", 34, 6, 31, 55),
    ("echo", 34, 4, 13, 53),
    ("foxtrot", 27, 2, 0, 42),
];

/// Matches whose per-agent totals equal `TOURNAMENT`.
fn synthetic_matches() -> Vec<MatchResult> {
    let n = TOURNAMENT.len();
    let mut games_left: Vec<u32> = TOURNAMENT.iter().map(|t| t.1).collect();
    let mut seating = Vec::new();
    for _ in 0..50 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(games_left[i]));
        let seats: Vec<usize> = order[..4].to_vec();
        for &a in &seats {
            games_left[a] -= 1;
        }
        seating.push(seats);
    }
    let mut appearances_left: Vec<u32> = TOURNAMENT.iter().map(|t| t.1).collect();
    let mut wins_left: Vec<u32> = TOURNAMENT.iter().map(|t| t.2).collect();
    let mut played = vec![0u32; n];
    seating
        .into_iter()
        .map(|seats| {
            let winner_agent =
                seats
                    .iter()
                    .copied()
                    .filter(|&a| wins_left[a] > 0)
                    .max_by(|&a, &b| {
                        let ra = wins_left[a] as f64 / appearances_left[a] as f64;
                        let rb = wins_left[b] as f64 / appearances_left[b] as f64;
                        ra.total_cmp(&rb)
                    });
            if let Some(w) = winner_agent {
                wins_left[w] -= 1;
            }
            let players = seats
                .iter()
                .enumerate()
                .map(|(seat, &a)| {
                    let (_, games, _, kills, deaths) = TOURNAMENT[a];
                    let k = played[a];
                    let share = |total: u32| total / games + u32::from(k < total % games);
                    played[a] += 1;
                    appearances_left[a] -= 1;
                    PlayerResult {
                        seat,
                        agent_id: TOURNAMENT[a].0.into(),
                        kills: share(kills),
                        deaths: share(deaths),
                        placement: if Some(a) == winner_agent { 1 } else { 2 },
                    }
                })
                .collect();
            MatchResult {
                winner: winner_agent.map(|w| seats.iter().position(|&a| a == w).unwrap()),
                ticks: 100,
                players,
            }
        })
        .collect()
}

fn tournament_golden() -> Check {
    let matches = synthetic_matches();
    let table = tournament_table(&matches);
    for (id, games, wins, kills, deaths) in TOURNAMENT {
        let row = table
            .rows
            .iter()
            .find(|r| r.agent_id == id)
            .ok_or("missing row")?;
        ensure(
            (row.games, row.wins, row.kills, row.deaths) == (games, wins, kills, deaths),
            || format!("{id}: {row:?}"),
        )?;
    }
    let top = &table.rows[0];
    ensure(top.agent_id == "alpha", || {
        format!("leader {}", top.agent_id)
    })?;
    let (rate, kd) = (top.win_rate_text(), top.kd_text());
    ensure(rate == "36.11" && kd == "2.38", || {
        format!("{rate}% K/D {kd}")
    })?;
    Ok(format!("{} matches, win {rate}% K/D {kd}", table.matches))
}

fn phantom_arithmetic() -> Check {
    let ceiling = score_ceiling(100.0, 10, 20, 0.0);
    ensure(ceiling == 155.0, || format!("ceiling {ceiling}"))?;
    let mut rng = keyed(7, "acceptance-phantom-fuzz", 0);
    for i in 0..10_000 {
        let rounds = rng.random_range(0..60);
        let total = rng.random_range(0..8);
        let inputs = ScoreInputs {
            captured_points: rng.random_range(-100.0..500.0),
            aux_points: rng.random_range(-20.0..150.0),
            base_points: rng.random_range(1.0..300.0),
            dynamic_bonus: rng.random_range(0.0..100.0),
            target_rounds: rng.random_range(1..40),
            max_rounds: rng.random_range(1..60),
            rounds_used: rounds,
            valid_rounds: rng.random_range(0..=rounds),
            completed: rng.random_range(0..=total),
            total,
        };
        let s = phantom_score(&inputs).normalized;
        ensure((0.0..=100.0).contains(&s), || {
            format!("fuzz case {i}: {inputs:?} -> {s}")
        })?;
    }
    Ok("ceiling 155, 10000 fuzz cases bounded".into())
}

fn melody_bounds() -> Check {
    let seeds = SeedManifest::builtin(GameId::Melody);
    let seeds = seeds.take(50).map_err(|e| e.to_string())?;
    let mut random = 0.0;
    for &seed in seeds {
        let mut perfect = builtin("oracle-perfect", GameId::Melody).unwrap();
        let rec = play(GameId::Melody, Difficulty::Medium, seed, perfect.as_mut());
        ensure(rec.metric("score") == Some(100.0), || {
            format!("perfect play scored {:?}", rec.metric("score"))
        })?;
        random += play(
            GameId::Melody,
            Difficulty::Medium,
            seed,
            &mut RandomAgent::new("random"),
        )
        .metric("score")
        .unwrap();
    }
    let mean = random / seeds.len() as f64;
    ensure((20.0..=31.0).contains(&mean), || {
        format!("random mean {mean:.2}")
    })?;
    Ok(format!("perfect 100, random mean {mean:.2}"))
}

fn determinism() -> Check {
    for (game, d) in tasks() {
        for seed in [3, 4] {
            let a = play(game, d, seed, &mut scripted(game));
            let b = play(game, d, seed, &mut scripted(game));
            ensure(a.digest() == b.digest(), || {
                format!("{game} {d} seed {seed}")
            })?;
        }
    }
    let mut corpus = Vec::new();
    for (i, game) in GameId::ALL.into_iter().enumerate() {
        let d = *game.difficulties().last().unwrap();
        let seed = 500 + i as u64;
        corpus.push(play(game, d, seed, oracle_agent(game).as_mut()));
        corpus.push(play(game, d, seed + 1, &mut RandomAgent::new("random")));
        corpus.push(play(game, d, seed + 2, &mut scripted(game)));
        corpus.push(play(
            game,
            d,
            seed + 3,
            &mut GibberishAgent::new("gibberish"),
        ));
        let iv = transforms(game).into_iter().next();
        corpus.push(play_with(
            game,
            d,
            seed + 4,
            &mut RandomAgent::new("random"),
            iv,
        ));
    }
    let mut matched = 0;
    for rec in &corpus {
        let line = serde_json::to_string(rec).map_err(|e| e.to_string())?;
        let back: EpisodeRecord = serde_json::from_str(&line).map_err(|e| e.to_string())?;
        if replay(&back).map_err(|e| e.to_string())?.matched {
            matched += 1;
        }
    }
    ensure(matched == corpus.len(), || {
        format!("{matched}/{} replays matched", corpus.len())
    })?;
    Ok(format!("{matched}/{} replays matched", corpus.len()))
}

fn separation() -> Check {
    let seeds = SeedManifest::builtin(GameId::Pathfinding);
    let seeds = seeds.take(50).map_err(|e| e.to_string())?;
    let (mut oracle, mut random) = (0.0, 0.0);
    for &seed in seeds {
        let o = play(
            GameId::Pathfinding,
            Difficulty::Hard,
            seed,
            oracle_agent(GameId::Pathfinding).as_mut(),
        );
        let r = play(
            GameId::Pathfinding,
            Difficulty::Hard,
            seed,
            &mut RandomAgent::new("random"),
        );
        oracle += o.metric("steps").unwrap();
        random += r.metric("steps").unwrap();
    }
    let n = seeds.len() as f64;
    let (oracle, random) = (oracle / n, random / n);
    ensure(oracle < 0.2 * random, || {
        format!("oracle {oracle:.1} vs random {random:.1}")
    })?;
    Ok(format!("oracle {oracle:.1} vs random {random:.1} steps"))
}

fn transforms(game: GameId) -> Vec<InterventionConfig> {
    let all = [
        InterventionConfig::Conflict {
            channel: Channel::Audio,
        },
        InterventionConfig::Conflict {
            channel: Channel::Text,
        },
        InterventionConfig::Ablation {
            removed: Channel::Audio,
        },
        InterventionConfig::Ablation {
            removed: Channel::Image,
        },
        InterventionConfig::Ablation {
            removed: Channel::Text,
        },
        InterventionConfig::Noise {
            target: Channel::Audio,
            audio: Default::default(),
            image: Default::default(),
        },
        InterventionConfig::Noise {
            target: Channel::Image,
            audio: Default::default(),
            image: Default::default(),
        },
        InterventionConfig::AidedPrompt {},
        InterventionConfig::Substitution {},
    ];
    all.into_iter()
        .filter(|c| c.check_applicable(game).is_ok())
        .collect()
}

fn purity() -> Check {
    let mut runs = 0;
    for (game, d) in tasks() {
        for cfg in transforms(game) {
            for seed in [1, 2] {
                let base = play(game, d, seed, &mut scripted(game));
                let moved = play_with(game, d, seed, &mut scripted(game), Some(cfg.clone()));
                let trace =
                    |r: &EpisodeRecord| r.steps.iter().map(|s| s.world_digest).collect::<Vec<_>>();
                ensure(
                    base.initial_world_digest == moved.initial_world_digest
                        && trace(&base) == trace(&moved),
                    || format!("{game} {d} {} seed {seed}", cfg.name()),
                )?;
                runs += 1;
            }
        }
    }
    let mut observations = 0;
    for &d in GameId::Pathfinding.difficulties() {
        for seed in 0..50 {
            let rec = play(
                GameId::Pathfinding,
                d,
                seed,
                oracle_agent(GameId::Pathfinding).as_mut(),
            );
            let mut driver = EpisodeDriver::new(create_env(rec.descriptor).unwrap(), None).unwrap();
            for step in &rec.steps {
                let obs = driver.observation().clone();
                let ctx = InterventionContext {
                    game: GameId::Pathfinding,
                    seed,
                    step_index: driver.step_index(),
                    aided_hint: None,
                };
                for ch in [Channel::Audio, Channel::Text] {
                    let ablate = InterventionConfig::Ablation { removed: ch };
                    let conflict = InterventionConfig::Conflict { channel: ch };
                    let both = apply(&ablate, apply(&conflict, obs.clone(), &ctx), &ctx);
                    ensure(both == apply(&ablate, obs.clone(), &ctx), || {
                        format!("{d} seed {seed} step {} {ch:?}", step.step_index)
                    })?;
                    observations += 1;
                }
                driver.submit_envelope(step.action.clone());
            }
        }
    }
    Ok(format!(
        "{runs} paired runs identical, {observations} commutation checks"
    ))
}

fn within_three_sigma(count: u64, n: u64, p: f64) -> bool {
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    (count as f64 - n as f64 * p).abs() <= 3.0 * sd
}

fn noise_statistics() -> Check {
    let frame = canvas(64, 48, [90, 140, 60]);
    let p = 0.05;
    let params = ImageNoise {
        gaussian_sigma: 0.0,
        salt_pepper_p: p,
        blur_kernel: 1,
    };
    let mut corrupted = 0u64;
    for i in 0..100 {
        let noisy = apply_image_noise(
            &frame,
            &params,
            &mut substream_at(11, Substream::Intervention, i),
        );
        corrupted += noisy
            .pixels()
            .filter(|px| px.0 == [0; 3] || px.0 == [255; 3])
            .count() as u64;
    }
    let pixels = 64 * 48 * 100;
    ensure(within_three_sigma(corrupted, pixels, p), || {
        format!("{corrupted} of {pixels} pixels")
    })?;

    let transcript: String = (0..100).map(|i| format!("w{i} ")).collect();
    let audio = AudioNoise {
        word_rate: 0.2,
        letter_rate: 0.0,
        ..AudioNoise::default()
    };
    let mut inserted = 0u64;
    for i in 0..100 {
        let out = apply_audio_noise(
            &transcript,
            &audio,
            &mut substream_at(12, Substream::Intervention, i),
        );
        inserted += out
            .split_whitespace()
            .filter(|t| audio.is_noise_token(t))
            .count() as u64;
    }
    ensure(within_three_sigma(inserted, 10_000, 0.2), || {
        format!("{inserted} tokens inserted")
    })?;
    Ok(format!(
        "{corrupted}/{pixels} pixels, {inserted}/10000 tokens"
    ))
}

fn unit_checks() -> Check {
    let t = trimmed_mean(&[1.0, 2.0, 3.0, 100.0]).map_err(|e| e.to_string())?;
    ensure(t == 2.5, || format!("trimmed mean {t}"))?;
    let zero = nps(31.9, 96.75, 31.9).map_err(|e| e.to_string())?;
    ensure(zero == 0.0, || format!("model = random gives {zero}"))?;
    let mut rng = keyed(9, "acceptance-affine", 0);
    for i in 0..1000 {
        let (m, h, r): (f64, f64, f64) = (
            rng.random_range(-1e3..1e3),
            rng.random_range(-1e3..1e3),
            rng.random_range(-1e3..1e3),
        );
        if (h - r).abs() < 1e-3 {
            continue;
        }
        let (a, b) = (rng.random_range(0.01..100.0), rng.random_range(-1e3..1e3));
        let before = nps(m, h, r).map_err(|e| e.to_string())?;
        let after = nps(a * m + b, a * h + b, a * r + b).map_err(|e| e.to_string())?;
        ensure(
            (before - after).abs() <= 1e-6 * before.abs().max(1.0),
            || format!("triple {i}: {before} vs {after}"),
        )?;
    }
    Ok("trimmed mean 2.5, NPS(random) 0, 1000 affine triples".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("nps golden", Duration::from_secs(1), nps_golden),
        (
            "tournament golden",
            Duration::from_secs(1),
            tournament_golden,
        ),
        (
            "phantom score arithmetic",
            Duration::from_secs(5),
            phantom_arithmetic,
        ),
        (
            "melody composite bound",
            Duration::from_secs(30),
            melody_bounds,
        ),
        ("determinism suite", Duration::from_secs(120), determinism),
        (
            "oracle/random separation",
            Duration::from_secs(300),
            separation,
        ),
        ("intervention purity", Duration::from_secs(120), purity),
        (
            "noise statistics",
            Duration::from_secs(30),
            noise_statistics,
        ),
        (
            "trimmed mean and nps units",
            Duration::from_secs(1),
            unit_checks,
        ),
    ];
    let mut failures = BTreeMap::new();
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let verdict = match (&result, took <= budget) {
            (Ok(_), true) => "PASS",
            _ => "FAIL",
        };
        let detail = match &result {
            Ok(d) | Err(d) => d.clone(),
        };
        println!(
            "{verdict} {name}: {detail} ({:.2}s, budget {}s)",
            took.as_secs_f64(),
            budget.as_secs()
        );
        if verdict == "FAIL" {
            failures.insert(name, detail);
        }
    }
    assert!(failures.is_empty(), "failed: {failures:?}");
}
