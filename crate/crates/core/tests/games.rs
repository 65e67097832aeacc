mod common;

use common::*;
use omniplay::agents::{builtin, AgentConnector, AgentRequest, RandomAgent};
use omniplay::games::pathfinding::{nav_step, NavAction, PathfindingEnv};
use omniplay::games::showdown::{survivor_action, Arena, ArenaAction, ShowdownEnv, PLAYERS};
use omniplay::rng::keyed;
use omniplay::{create_env, Difficulty, Environment, EpisodeDriver, GameId, Outcome};
use proptest::prelude::*;

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn navigator_matches_shortest_path() {
    for d in GameId::Pathfinding.difficulties() {
        for seed in 0..50 {
            let rec = play_oracle(GameId::Pathfinding, *d, seed);
            assert_eq!(rec.outcome, Outcome::GoalReached);
            let steps = rec.metric("steps").unwrap();
            let shortest = rec.metric("shortest_path").unwrap();
            assert!(
                (steps - shortest).abs() <= 1.0,
                "{d} seed {seed}: {steps} vs {shortest}"
            );
        }
    }
}

#[test]
fn random_walker_is_far_slower_on_hard() {
    let oracle = mean((0..20).map(|s| {
        play_oracle(GameId::Pathfinding, Difficulty::Hard, s)
            .metric("steps")
            .unwrap()
    }));
    let randoms: Vec<_> = (0..20)
        .map(|s| play_random(GameId::Pathfinding, Difficulty::Hard, s))
        .collect();
    let random = mean(randoms.iter().map(|r| r.metric("steps").unwrap()));
    assert!(random >= 3.0 * oracle, "{random} vs {oracle}");
    assert!(randoms
        .iter()
        .any(|r| r.steps.len() == 500 && r.outcome == Outcome::StepCapHit));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn walker_never_ends_inside_a_wall(
        seed in 0u64..10_000,
        moves in proptest::collection::vec((-180.0f64..=180.0, 0.0f64..=1.0), 1..80),
    ) {
        let env = PathfindingEnv::new(descriptor(GameId::Pathfinding, Difficulty::Hard, seed)).unwrap();
        let maze = env.maze();
        let mut state = *env.state();
        for (rotate_deg, move_units) in moves {
            state = nav_step(&state, maze, Some(NavAction { rotate_deg, move_units }));
            prop_assert!(!maze.is_wall(state.cell()));
        }
    }
}

#[test]
fn transcriber_succeeds_everywhere() {
    for d in GameId::Echoes.difficulties() {
        for seed in 0..50 {
            let rec = play_oracle(GameId::Echoes, *d, seed);
            let len = rec.metric("sequence_length").unwrap();
            assert_eq!(rec.metric("success"), Some(1.0), "{d} seed {seed}");
            for key in ["coord_acc", "icon_acc", "score"] {
                assert_eq!(rec.metric(key), Some(len), "{key}");
            }
        }
    }
}

#[test]
fn deducer_completes_but_pays_for_probes() {
    for seed in 0..50 {
        let rec = play_oracle(GameId::Melody, Difficulty::Medium, seed);
        assert_eq!(rec.metric("completed"), Some(1.0));
        assert!(rec.metric("score").unwrap() < 100.0);
        let mut perfect = builtin("oracle-perfect", GameId::Melody).unwrap();
        let rec = play(
            GameId::Melody,
            Difficulty::Medium,
            seed,
            perfect.as_mut(),
            None,
        );
        assert_eq!(rec.metric("score"), Some(100.0));
    }
}

#[test]
fn planner_clears_easy_missions() {
    let recs: Vec<_> = (0..30)
        .map(|s| play_oracle(GameId::Phantom, Difficulty::Easy, s))
        .collect();
    let success = mean(recs.iter().map(|r| r.metric("success_rate").unwrap()));
    assert!(success >= 0.9, "{success}");
}

#[test]
fn random_agent_never_emits_invalid_actions() {
    for (game, difficulty) in tasks() {
        for seed in 0..4 {
            let rec = play_random(game, difficulty, seed);
            assert_eq!(rec.invalid_count(), 0, "{game} {difficulty}");
        }
    }
}

#[test]
fn random_arena_actions_are_uniform() {
    let desc = descriptor(GameId::Showdown, Difficulty::None, 3);
    let mut driver = EpisodeDriver::new(create_env(desc).unwrap(), None).unwrap();
    let obs = driver.observation().clone();
    let space = driver.action_space();
    let mut agent = RandomAgent::new("random");
    agent.begin_episode(&desc, 0);
    let request = AgentRequest {
        descriptor: &desc,
        seat: 0,
        system_prompt: driver.system_prompt(),
        observation: &obs,
        history: &[],
        action_space: &space,
        privileged: None,
    };
    let n = 10_000usize;
    let mut counts = [0usize; 6];
    for _ in 0..n {
        let reply = agent.act(&request).unwrap();
        let a = omniplay::games::showdown::parse_arena_action(&reply).unwrap();
        counts[ArenaAction::ALL.iter().position(|&x| x == a).unwrap()] += 1;
    }
    let expected = n as f64 / 6.0;
    let sd = (n as f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
    let mut chi2 = 0.0;
    for c in counts {
        assert!((c as f64 - expected).abs() <= 5.0 * sd, "{counts:?}");
        chi2 += (c as f64 - expected).powi(2) / expected;
    }
    // 99.9th percentile of chi-square with 5 degrees of freedom.
    assert!(chi2 < 20.515, "chi2 {chi2}");
}

fn bot_match(seed: u64, tick_cap: u32, mut check: impl FnMut(&Arena, &Arena)) -> Arena {
    let mut arena = Arena::generate(seed);
    while !arena.is_over() && arena.tick < tick_cap {
        let actions: [ArenaAction; PLAYERS] = std::array::from_fn(|seat| {
            let mut rng = keyed(seed, "test-bot", arena.tick as u64 * 4 + seat as u64);
            if seat % 2 == 0 {
                survivor_action(&arena, seat, &mut rng)
            } else {
                *ArenaAction::ALL
                    .get((arena.tick as usize * 7 + seat * 3) % 6)
                    .unwrap()
            }
        });
        let before = arena.clone();
        arena.showdown_tick(&actions);
        check(&before, &arena);
    }
    arena
}

#[test]
fn deaths_are_monotone_and_caused() {
    let mut deaths_seen = 0;
    for seed in 0..40 {
        let end = bot_match(seed, 300, |before, after| {
            assert!(after.alive_count() <= before.alive_count());
            for p in &after.players {
                let was_alive = before.players[p.seat].alive;
                if was_alive && !p.alive {
                    assert_eq!(p.died_at, Some(after.tick));
                    assert!(after.last_blast.contains(&p.pos), "death without a blast");
                    let rec = after
                        .deaths
                        .iter()
                        .find(|d| d.seat == p.seat && d.tick == after.tick);
                    assert!(rec.is_some(), "death without a record");
                }
                assert!(was_alive || !p.alive, "revival");
            }
        });
        deaths_seen += end.deaths.len();
        if end.alive_count() == 1 {
            let last = end.players.iter().find(|p| p.alive).unwrap().seat;
            assert_eq!(end.winner(), Some(last));
        }
    }
    assert!(deaths_seen > 20);
}

#[test]
fn passive_seat_wins_only_by_outlasting() {
    for seed in 0..30 {
        let mut env =
            ShowdownEnv::new(descriptor(GameId::Showdown, Difficulty::None, seed)).unwrap();
        let wait = env.parse_action("ACTION: wait");
        while env.status() == omniplay::engine::Status::Running && env.arena().tick < 500 {
            env.apply(&wait);
        }
        let arena = env.arena();
        assert_eq!(arena.players[0].kills, 0);
        assert!(arena.deaths.iter().all(|d| d.by != 0 || d.seat == 0));
        if arena.winner() == Some(0) {
            assert!(arena.players[1..].iter().all(|p| !p.alive));
        }
    }
}

#[test]
fn mixed_table_match_replays() {
    use omniplay::games::showdown::tournament::run_match;
    let mut a = builtin("random", GameId::Showdown).unwrap();
    let mut b = builtin("oracle", GameId::Showdown).unwrap();
    let mut c = builtin("passive", GameId::Showdown).unwrap();
    let mut d = builtin("gibberish", GameId::Showdown).unwrap();
    let mut seats: [&mut dyn AgentConnector; PLAYERS] =
        [a.as_mut(), b.as_mut(), c.as_mut(), d.as_mut()];
    let rec = run_match(0, 21, 200, &mut seats).unwrap();
    assert!(rec.invalid[3] > 0);
    assert_eq!(rec.invalid[0], 0);
    let replayed = omniplay::games::showdown::tournament::replay_match(&rec).unwrap();
    assert_eq!(replayed, rec.result);
}

#[test]
fn planner_finishes_easy_missions_within_heuristic_rounds() {
    let within = (0..50)
        .map(|s| play_oracle(GameId::Phantom, Difficulty::Easy, s))
        .filter(|r| {
            r.metric("success_rate") == Some(1.0)
                && r.metric("rounds_used") <= r.metric("target_rounds")
        })
        .count();
    assert!(within >= 45, "{within}/50");
}
