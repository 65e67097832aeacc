mod common;

use common::*;
use omniplay::agents::{GibberishAgent, RandomAgent};
use omniplay::engine::StepRecord;
use omniplay::interventions::Channel;
use omniplay::{
    create_env, replay, replay_with, EpisodeDriver, EpisodeRecord, GameId, InterventionConfig,
    Outcome,
};
use proptest::prelude::*;

#[test]
fn identical_runs_give_identical_digests() {
    for (game, difficulty) in tasks() {
        for seed in [1, 2, 3] {
            let a = play(game, difficulty, seed, &mut scripted(game), None);
            let b = play(game, difficulty, seed, &mut scripted(game), None);
            assert_eq!(a.digest(), b.digest(), "{game} {difficulty} seed {seed}");
            let r1 = play_random(game, difficulty, seed);
            let r2 = play_random(game, difficulty, seed);
            assert_eq!(
                r1.digest(),
                r2.digest(),
                "{game} {difficulty} seed {seed} random"
            );
        }
        let a = play(game, difficulty, 10, &mut scripted(game), None);
        let b = play(game, difficulty, 11, &mut scripted(game), None);
        assert_ne!(
            a.initial_world_digest, b.initial_world_digest,
            "{game} seeds collide"
        );
    }
}

fn corpus() -> Vec<EpisodeRecord> {
    let mut out = Vec::new();
    for (i, game) in GameId::ALL.into_iter().enumerate() {
        let d = *game.difficulties().last().unwrap();
        let seed = 100 + i as u64;
        out.push(play_oracle(game, d, seed));
        out.push(play_random(game, d, seed + 1));
        out.push(play(game, d, seed + 2, &mut scripted(game), None));
        out.push(play(
            game,
            d,
            seed + 3,
            &mut GibberishAgent::new("gibberish"),
            None,
        ));
        let iv = interventions_for(game).into_iter().next();
        out.push(play(game, d, seed + 4, &mut RandomAgent::new("random"), iv));
    }
    out
}

#[test]
fn replay_corpus_matches_after_serialization() {
    let records = corpus();
    assert_eq!(records.len(), 25);
    for r in &records {
        let line = serde_json::to_string(r).unwrap();
        let back: EpisodeRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(&back, r);
        assert_eq!(back.digest(), r.digest());
        let result = replay(&back).unwrap();
        assert!(
            result.matched,
            "{} {} diverged at {:?}",
            r.descriptor.game_id, r.agent_id, result.divergence_step
        );
    }
}

#[test]
fn tampering_is_detected() {
    let mut rec = play_oracle(GameId::Pathfinding, omniplay::Difficulty::Medium, 9);
    let mid = rec.steps.len() / 2;
    rec.steps[mid].action.raw_text = "ACTION: rotate 180 move 1".into();
    let r = replay(&rec).unwrap();
    assert!(!r.matched);
    assert_eq!(r.divergence_step, Some(mid as u32));

    let mut rec = play_random(GameId::Melody, omniplay::Difficulty::Medium, 9);
    rec.steps[3].world_digest = omniplay::digest::Digest([0; 32]);
    assert_eq!(replay(&rec).unwrap().divergence_step, Some(3));
}

#[test]
fn replay_under_other_intervention_diverges_at_first_affected_observation() {
    let rec = play_oracle(GameId::Pathfinding, omniplay::Difficulty::Easy, 4);
    let r = replay_with(
        &rec,
        Some(InterventionConfig::Ablation {
            removed: Channel::Audio,
        }),
    )
    .unwrap();
    assert_eq!(
        r,
        omniplay::ReplayResult {
            matched: false,
            divergence_step: Some(0)
        }
    );

    let rec = play_oracle(GameId::Echoes, omniplay::Difficulty::Easy, 4);
    let r = replay_with(&rec, Some(InterventionConfig::AidedPrompt {})).unwrap();
    assert!(!r.matched);
}

#[test]
fn aborted_episode_replays_its_prefix() {
    let mut agent = scripted(GameId::Melody).failing_after(3);
    let rec = play(
        GameId::Melody,
        omniplay::Difficulty::Medium,
        5,
        &mut agent,
        None,
    );
    assert_eq!(rec.outcome, Outcome::Aborted);
    assert_eq!(rec.steps.len(), 3);
    assert!(rec.note.as_deref().unwrap().contains("transport"));
    assert!(replay(&rec).unwrap().matched);
}

fn world_trace(steps: &[StepRecord]) -> Vec<String> {
    steps.iter().map(|s| s.world_digest.to_hex()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn any_seed_is_reproducible(task in 0usize..9, seed in any::<u64>()) {
        let (game, difficulty) = tasks()[task];
        let a = play(game, difficulty, seed, &mut RandomAgent::new("random"), None);
        let b = play(game, difficulty, seed, &mut RandomAgent::new("random"), None);
        prop_assert_eq!(world_trace(&a.steps), world_trace(&b.steps));
        prop_assert_eq!(a.digest(), b.digest());
    }

    #[test]
    fn step_cap_bounds_every_record(task in 0usize..9, seed in 0u64..1000, cap in 1u32..40) {
        let (game, difficulty) = tasks()[task];
        let desc = descriptor(game, difficulty, seed).with_step_cap(cap).unwrap();
        let rec = omniplay::run_episode(create_env(desc).unwrap(), &mut RandomAgent::new("random"), None).unwrap();
        prop_assert!(rec.steps.len() as u32 <= cap);
        if rec.outcome == Outcome::StepCapHit {
            prop_assert_eq!(rec.steps.len() as u32, cap);
        }
    }

    #[test]
    fn invalid_replies_leave_the_world_untouched(task in 0usize..9, seed in 0u64..1000, prefix in 0usize..6, junk in "[a-z ]{0,20}") {
        let (game, difficulty) = tasks()[task];
        let mut driver = EpisodeDriver::new(create_env(descriptor(game, difficulty, seed)).unwrap(), None).unwrap();
        let mut replies = scripted(game);
        for _ in 0..prefix {
            if driver.is_done() {
                break;
            }
            let reply = next_reply(&mut replies, &mut driver);
            driver.submit(&reply);
        }
        prop_assume!(!driver.is_done());
        let before = driver.world_digest();
        driver.observation();
        let report = driver.submit(&junk);
        prop_assert!(!report.valid);
        if game == GameId::Showdown {
            let mut twin = EpisodeDriver::new(create_env(descriptor(game, difficulty, seed)).unwrap(), None).unwrap();
            for s in &driver.steps()[..driver.steps().len() - 1] {
                twin.submit_envelope(s.action.clone());
            }
            twin.submit("ACTION: wait");
            prop_assert_eq!(driver.world_digest(), twin.world_digest());
        } else {
            prop_assert_eq!(before, driver.world_digest());
        }
    }
}

fn next_reply(agent: &mut omniplay::agents::ScriptedAgent, driver: &mut EpisodeDriver) -> String {
    use omniplay::agents::{AgentConnector, AgentRequest};
    let space = driver.action_space();
    let desc = *driver.descriptor();
    let system = driver.system_prompt().to_string();
    let obs = driver.observation().clone();
    let request = AgentRequest {
        descriptor: &desc,
        seat: 0,
        system_prompt: &system,
        observation: &obs,
        history: &[],
        action_space: &space,
        privileged: None,
    };
    agent.act(&request).unwrap()
}
