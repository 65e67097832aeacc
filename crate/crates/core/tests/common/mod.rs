#![allow(dead_code)]

use omniplay::agents::{oracle_agent, AgentConnector, RandomAgent, ScriptedAgent};
use omniplay::{
    create_env, run_episode, Difficulty, EnvDescriptor, EpisodeRecord, GameId, InterventionConfig,
};

pub fn tasks() -> Vec<(GameId, Difficulty)> {
    GameId::ALL
        .iter()
        .flat_map(|&g| g.difficulties().iter().map(move |&d| (g, d)))
        .collect()
}

pub fn descriptor(game: GameId, difficulty: Difficulty, seed: u64) -> EnvDescriptor {
    EnvDescriptor::new(game, difficulty, seed).unwrap()
}

pub fn play(
    game: GameId,
    difficulty: Difficulty,
    seed: u64,
    agent: &mut dyn AgentConnector,
    intervention: Option<InterventionConfig>,
) -> EpisodeRecord {
    let env = create_env(descriptor(game, difficulty, seed)).unwrap();
    run_episode(env, agent, intervention).unwrap()
}

pub fn play_oracle(game: GameId, difficulty: Difficulty, seed: u64) -> EpisodeRecord {
    play(game, difficulty, seed, oracle_agent(game).as_mut(), None)
}

pub fn play_random(game: GameId, difficulty: Difficulty, seed: u64) -> EpisodeRecord {
    play(
        game,
        difficulty,
        seed,
        &mut RandomAgent::new("random"),
        None,
    )
}

/// Fixed replies per game, independent of what the agent observes.
pub fn scripted(game: GameId) -> ScriptedAgent {
    let replies: &[&str] = match game {
        GameId::Pathfinding => &[
            "ACTION: rotate 90 move 1",
            "ACTION: rotate 0 move 1",
            "ACTION: rotate -45 move 0.5",
            "I am lost",
        ],
        GameId::Echoes => &[
            "ACTION: sequence (0,0,star) (1,1,moon) (0,1,heart)",
            "ACTION: click 0 0",
            "ACTION: click 1 1",
        ],
        GameId::Melody => &[
            "ACTION: click red",
            "ACTION: click blue",
            "nothing",
            "ACTION: click green",
        ],
        GameId::Phantom => &[
            "ACTION: move U1 3 3\nACTION: scout U2",
            "ACTION: capture U1",
            "ACTION: hold U2\nACTION: move U1 0 0",
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

/// Every intervention applicable to `game`, with default parameters.
pub fn interventions_for(game: GameId) -> Vec<InterventionConfig> {
    use omniplay::interventions::Channel;
    let all = vec![
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
        InterventionConfig::Simplified {},
        InterventionConfig::Substitution {},
    ];
    all.into_iter()
        .filter(|c| c.check_applicable(game).is_ok())
        .collect()
}
