mod common;

use common::*;
use omniplay::agents::RandomAgent;
use omniplay::games::echoes::EchoesEnv;
use omniplay::interventions::{
    apply, apply_audio_noise, apply_image_noise, AudioNoise, Channel, ImageNoise,
    InterventionContext,
};
use omniplay::render::raster::canvas;
use omniplay::rng::{substream_at, Substream};
use omniplay::{create_env, Difficulty, EpisodeDriver, EpisodeRecord, GameId, InterventionConfig};
use proptest::prelude::*;

fn world_trace(r: &EpisodeRecord) -> Vec<omniplay::digest::Digest> {
    r.steps.iter().map(|s| s.world_digest).collect()
}

#[test]
fn observation_transforms_never_touch_the_world() {
    for (game, difficulty) in tasks() {
        for cfg in interventions_for(game) {
            if cfg == (InterventionConfig::Simplified {}) {
                continue;
            }
            for seed in 0..3 {
                let base = play(game, difficulty, seed, &mut scripted(game), None);
                let moved = play(
                    game,
                    difficulty,
                    seed,
                    &mut scripted(game),
                    Some(cfg.clone()),
                );
                assert_eq!(
                    base.initial_world_digest,
                    moved.initial_world_digest,
                    "{game} {}",
                    cfg.name()
                );
                assert_eq!(
                    world_trace(&base),
                    world_trace(&moved),
                    "{game} {difficulty} {}",
                    cfg.name()
                );
                assert_eq!(base.outcome, moved.outcome);
                assert_eq!(base.raw_metrics, moved.raw_metrics);

                let base = play_random(game, difficulty, seed);
                let moved = play(
                    game,
                    difficulty,
                    seed,
                    &mut RandomAgent::new("random"),
                    Some(cfg.clone()),
                );
                assert_eq!(
                    world_trace(&base),
                    world_trace(&moved),
                    "{game} {difficulty} {} random",
                    cfg.name()
                );
                assert_eq!(base.raw_metrics, moved.raw_metrics);
            }
        }
    }
}

#[test]
fn simplified_variant_keeps_the_layout() {
    for d in [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard] {
        for seed in 0..5 {
            let base = EchoesEnv::new(descriptor(GameId::Echoes, d, seed)).unwrap();
            let mut simple = EchoesEnv::new(descriptor(GameId::Echoes, d, seed)).unwrap();
            omniplay::Environment::set_simplified(&mut simple).unwrap();
            assert_eq!(base.grid(), simple.grid());
            assert_eq!(base.sequence(), simple.sequence());
        }
    }
    let rec = play_oracle(GameId::Echoes, Difficulty::Hard, 3);
    let simple = play(
        GameId::Echoes,
        Difficulty::Hard,
        3,
        omniplay::agents::oracle_agent(GameId::Echoes).as_mut(),
        Some(InterventionConfig::Simplified {}),
    );
    assert_eq!(simple.steps.len(), 1);
    assert_eq!(simple.metric("coord_acc"), rec.metric("coord_acc"));
    assert_eq!(simple.metric("simplified_score"), Some(15.0));
}

fn context(driver: &EpisodeDriver) -> InterventionContext {
    InterventionContext {
        game: driver.descriptor().game_id,
        seed: driver.descriptor().seed,
        step_index: driver.step_index(),
        aided_hint: driver.env().aided_hint(),
    }
}

/// Conflict on a channel that is then ablated leaves nothing behind.
#[test]
fn conflict_under_ablation_equals_ablation() {
    let mut checked = 0;
    for d in GameId::Pathfinding.difficulties() {
        for seed in 0..50 {
            let rec = play_oracle(GameId::Pathfinding, *d, seed);
            let mut driver = EpisodeDriver::new(create_env(rec.descriptor).unwrap(), None).unwrap();
            for step in &rec.steps {
                let obs = driver.observation().clone();
                let ctx = context(&driver);
                for ch in [Channel::Audio, Channel::Text] {
                    let ablate = InterventionConfig::Ablation { removed: ch };
                    let conflict = InterventionConfig::Conflict { channel: ch };
                    let both = apply(&ablate, apply(&conflict, obs.clone(), &ctx), &ctx);
                    let alone = apply(&ablate, obs.clone(), &ctx);
                    assert_eq!(both, alone, "seed {seed} step {}", step.step_index);
                    assert_ne!(
                        apply(&conflict, obs.clone(), &ctx),
                        obs,
                        "conflict must change {ch:?}"
                    );
                    checked += 1;
                }
                driver.submit_envelope(step.action.clone());
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn ablation_drops_only_its_channel() {
    let rec = play_oracle(GameId::Pathfinding, Difficulty::Medium, 2);
    let mut driver = EpisodeDriver::new(create_env(rec.descriptor).unwrap(), None).unwrap();
    let obs = driver.observation().clone();
    let ctx = context(&driver);
    let no_audio = apply(
        &InterventionConfig::Ablation {
            removed: Channel::Audio,
        },
        obs.clone(),
        &ctx,
    );
    assert!(no_audio.audio.is_none());
    assert_eq!(
        (no_audio.frame.as_ref(), no_audio.text.as_ref()),
        (obs.frame.as_ref(), obs.text.as_ref())
    );
    let no_text = apply(
        &InterventionConfig::Ablation {
            removed: Channel::Text,
        },
        obs.clone(),
        &ctx,
    );
    assert!(no_text.text.is_none());
    assert_eq!(
        no_text.turn_prompt(),
        format!("{}\n{}", no_text.inventory_line(), obs.action_request)
    );
    let no_image = apply(
        &InterventionConfig::Ablation {
            removed: Channel::Image,
        },
        obs.clone(),
        &ctx,
    );
    assert!(no_image.frame.is_none() && no_image.video.is_none());
    assert_eq!(no_image.audio, obs.audio);
}

#[test]
fn echoes_audio_ablation_keeps_the_highlight_stream() {
    for seed in 0..10 {
        let env = create_env(descriptor(GameId::Echoes, Difficulty::Hard, seed)).unwrap();
        let mut base = EpisodeDriver::new(env, None).unwrap();
        let env = create_env(descriptor(GameId::Echoes, Difficulty::Hard, seed)).unwrap();
        let mut ablated = EpisodeDriver::new(
            env,
            Some(InterventionConfig::Ablation {
                removed: Channel::Audio,
            }),
        )
        .unwrap();
        let a = base.observation().channel_digests();
        let b = ablated.observation().channel_digests();
        assert!(a.video.is_some());
        assert_eq!(a.video, b.video);
        assert!(b.audio.is_none());
    }
}

#[test]
fn seeded_transforms_rerun_byte_identical() {
    let noise = InterventionConfig::Noise {
        target: Channel::Image,
        audio: AudioNoise::default(),
        image: ImageNoise::default(),
    };
    let a = play(
        GameId::Phantom,
        Difficulty::Easy,
        8,
        &mut scripted(GameId::Phantom),
        Some(noise.clone()),
    );
    let b = play(
        GameId::Phantom,
        Difficulty::Easy,
        8,
        &mut scripted(GameId::Phantom),
        Some(noise),
    );
    let obs = |r: &EpisodeRecord| {
        r.steps
            .iter()
            .map(|s| s.observation.digest)
            .collect::<Vec<_>>()
    };
    assert_eq!(obs(&a), obs(&b));
    let clean = play(
        GameId::Phantom,
        Difficulty::Easy,
        8,
        &mut scripted(GameId::Phantom),
        None,
    );
    assert_ne!(obs(&a), obs(&clean));
}

#[test]
fn scope_follows_the_game_table() {
    let pairs = [
        (
            InterventionConfig::Noise {
                target: Channel::Audio,
                audio: AudioNoise::default(),
                image: ImageNoise::default(),
            },
            GameId::Pathfinding,
        ),
        (InterventionConfig::Substitution {}, GameId::Melody),
        (InterventionConfig::Simplified {}, GameId::Pathfinding),
        (InterventionConfig::AidedPrompt {}, GameId::Showdown),
        (
            InterventionConfig::Conflict {
                channel: Channel::Audio,
            },
            GameId::Phantom,
        ),
    ];
    for (cfg, game) in pairs {
        let d = game.difficulties()[0];
        let env = create_env(descriptor(game, d, 1)).unwrap();
        assert!(
            EpisodeDriver::new(env, Some(cfg.clone())).is_err(),
            "{} on {game}",
            cfg.name()
        );
    }
    for game in GameId::ALL {
        for cfg in interventions_for(game) {
            let env = create_env(descriptor(game, game.difficulties()[0], 1)).unwrap();
            assert!(EpisodeDriver::new(env, Some(cfg)).is_ok());
        }
    }
}

#[test]
fn aided_melody_prompt_carries_the_mapping() {
    let env = create_env(descriptor(GameId::Melody, Difficulty::Medium, 3)).unwrap();
    let mut driver = EpisodeDriver::new(env, Some(InterventionConfig::AidedPrompt {})).unwrap();
    driver.submit("ACTION: click red");
    driver.submit("ACTION: click blue");
    let text = driver.observation().text.clone().unwrap();
    let hint = driver.env().aided_hint().unwrap();
    assert!(text.ends_with(&hint), "{text}");
    assert!(hint.contains("red") && hint.contains("blue"));
}

/// |count - n p| <= 3 sqrt(n p (1 - p))
fn within_three_sigma(count: u64, n: u64, p: f64) -> bool {
    let mean = n as f64 * p;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    (count as f64 - mean).abs() <= 3.0 * sd
}

#[test]
fn salt_and_pepper_rate_matches_binomial() {
    let frame = canvas(64, 48, [120, 130, 140]);
    let params = ImageNoise {
        gaussian_sigma: 0.0,
        salt_pepper_p: 0.05,
        blur_kernel: 1,
    };
    let mut corrupted = 0u64;
    for i in 0..100 {
        let mut rng = substream_at(77, Substream::Intervention, i);
        let noisy = apply_image_noise(&frame, &params, &mut rng);
        corrupted += noisy
            .pixels()
            .filter(|p| p.0 == [0; 3] || p.0 == [255; 3])
            .count() as u64;
    }
    let n = 64 * 48 * 100;
    assert!(within_three_sigma(corrupted, n, 0.05), "{corrupted} of {n}");
}

#[test]
fn inserted_token_count_matches_binomial() {
    let transcript: String = (0..100).map(|i| format!("word{i} ")).collect();
    let single = AudioNoise {
        word_rate: 0.2,
        letter_rate: 0.0,
        ..AudioNoise::default()
    };
    let both = AudioNoise::default();
    let mut inserted_single = 0u64;
    let mut inserted_both = 0u64;
    for i in 0..100 {
        let mut rng = substream_at(5, Substream::Intervention, i);
        let out = apply_audio_noise(&transcript, &single, &mut rng);
        inserted_single += out
            .split_whitespace()
            .filter(|t| single.is_noise_token(t))
            .count() as u64;
        let mut rng = substream_at(6, Substream::Intervention, i);
        let out = apply_audio_noise(&transcript, &both, &mut rng);
        inserted_both += out
            .split_whitespace()
            .filter(|t| both.is_noise_token(t))
            .count() as u64;
    }
    assert!(
        within_three_sigma(inserted_single, 100 * 100, 0.2),
        "{inserted_single}"
    );
    let (mean, var) = (
        10_000.0 * (0.15 + 0.10),
        10_000.0 * (0.15 * 0.85 + 0.10 * 0.90),
    );
    assert!(
        (inserted_both as f64 - mean).abs() <= 3.0 * f64::sqrt(var),
        "{inserted_both}"
    );
}

proptest! {
    #[test]
    fn audio_noise_only_inserts(words in proptest::collection::vec("[A-Z][a-z]{1,6}", 0..40), seed in any::<u64>()) {
        let transcript = words.join(" ");
        let params = AudioNoise::default();
        let mut rng = substream_at(seed, Substream::Intervention, 0);
        let out = apply_audio_noise(&transcript, &params, &mut rng);
        let kept: Vec<&str> = out.split_whitespace().filter(|t| !params.is_noise_token(t)).collect();
        prop_assert_eq!(kept, words.iter().map(String::as_str).collect::<Vec<_>>());
    }

    #[test]
    fn image_noise_keeps_dimensions(w in 1u32..40, h in 1u32..40, seed in any::<u64>()) {
        let frame = canvas(w, h, [10, 200, 90]);
        let mut rng = substream_at(seed, Substream::Intervention, 1);
        let out = apply_image_noise(&frame, &ImageNoise::default(), &mut rng);
        prop_assert_eq!(out.dimensions(), (w, h));
    }
}
