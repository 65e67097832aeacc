use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use omniplay::agents::RandomAgent;
use omniplay::{create_env, run_episode, Difficulty, EnvDescriptor, EpisodeRecord, GameId};
use omniplay_harness::store;

fn omniplay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_omniplay"))
        .args(args)
        .output()
        .unwrap()
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .display()
        .to_string()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn default_run_writes_fifty_episodes_and_guards_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = config("pathfinding-easy.toml");

    let dry = omniplay(&["run", "--config", &cfg, "--out", path(&out), "--dry-run"]);
    assert!(dry.status.success(), "{}", stderr(&dry));
    assert!(String::from_utf8_lossy(&dry.stdout).contains("50"));
    assert!(!out.exists(), "dry run wrote output");

    let run = omniplay(&["run", "--config", &cfg, "--out", path(&out)]);
    assert!(run.status.success(), "{}", stderr(&run));
    let records: Vec<EpisodeRecord> = store::read_jsonl(&out.join(store::EPISODES_FILE)).unwrap();
    assert_eq!(records.len(), 50);
    assert!(records
        .iter()
        .all(|r| r.agent_id == "random" && r.descriptor.difficulty == Difficulty::Easy));
    assert!(out.join("scores.txt").exists());

    let again = omniplay(&["run", "--config", &cfg, "--out", path(&out)]);
    assert!(!again.status.success());
    assert!(stderr(&again).contains("--force"), "{}", stderr(&again));

    let forced = omniplay(&[
        "run",
        "--config",
        &cfg,
        "--out",
        path(&out),
        "--force",
        "--concurrency",
        "1",
    ]);
    assert!(forced.status.success(), "{}", stderr(&forced));
    let rerun: Vec<EpisodeRecord> = store::read_jsonl(&out.join(store::EPISODES_FILE)).unwrap();
    let digests = |rs: &[EpisodeRecord]| rs.iter().map(|r| r.digest()).collect::<Vec<_>>();
    assert_eq!(
        digests(&records),
        digests(&rerun),
        "concurrency changed results"
    );

    let replay = omniplay(&["replay", path(&out.join(store::EPISODES_FILE))]);
    assert!(replay.status.success(), "{}", stderr(&replay));

    let s1 = tmp.path().join("s1");
    let s2 = tmp.path().join("s2");
    assert!(omniplay(&["score", path(&out), "--out", path(&s1)])
        .status
        .success());
    assert!(omniplay(&["score", path(&out), "--out", path(&s2)])
        .status
        .success());
    for file in ["scores.txt", "scores.json"] {
        assert_eq!(
            std::fs::read(s1.join(file)).unwrap(),
            std::fs::read(s2.join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn replay_flags_tampered_logs() {
    let tmp = tempfile::tempdir().unwrap();
    let env =
        create_env(EnvDescriptor::new(GameId::Melody, Difficulty::Medium, 4).unwrap()).unwrap();
    let mut rec = run_episode(env, &mut RandomAgent::new("random"), None).unwrap();
    rec.steps[0].action.raw_text = "ACTION: click violet".into();
    let log = tmp.path().join("episodes.jsonl");
    store::write_jsonl(&log, &[rec]).unwrap();
    let out = omniplay(&["replay", path(&log)]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn score_refuses_empty_input() {
    let tmp = tempfile::tempdir().unwrap();
    let out = omniplay(&[
        "score",
        path(tmp.path()),
        "--out",
        path(&tmp.path().join("r")),
    ]);
    assert!(!out.status.success());
    assert!(
        stderr(&out).to_lowercase().contains("no"),
        "{}",
        stderr(&out)
    );
}

fn echoes_record(agent: &str, score: f64, coord: f64, icon: f64) -> EpisodeRecord {
    let env = create_env(EnvDescriptor::new(GameId::Echoes, Difficulty::Hard, 2).unwrap()).unwrap();
    let mut rec = run_episode(env, &mut RandomAgent::new(agent), None).unwrap();
    rec.agent_id = agent.into();
    rec.raw_metrics = [
        ("score", score),
        ("coord_acc", coord),
        ("icon_acc", icon),
        ("success", 0.0),
        ("parse_failed", 0.0),
    ]
    .iter()
    .map(|(k, v)| (k.to_string(), *v))
    .collect();
    rec
}

#[test]
fn score_reports_normalized_performance_from_logs() {
    let tmp = tempfile::tempdir().unwrap();
    let logs = tmp.path().join("logs");
    std::fs::create_dir_all(logs.join("humans")).unwrap();
    store::write_jsonl(
        &logs.join(store::EPISODES_FILE),
        &[
            echoes_record("model", 10.2, 13.5, 13.5),
            echoes_record("random", 0.1, 0.07, 0.03),
        ],
    )
    .unwrap();
    store::write_jsonl(
        &logs.join("humans").join(store::HUMAN_LOG_FILE),
        &[echoes_record("human/p7", 2.6, 2.3, 4.6)],
    )
    .unwrap();
    let out: PathBuf = tmp.path().join("report");
    let run = omniplay(&["score", path(&logs), "--out", path(&out)]);
    assert!(run.status.success(), "{}", stderr(&run));
    let nps: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("nps.json")).unwrap()).unwrap();
    let model = nps
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["agent_id"] == "model")
        .unwrap();
    let value = model["nps"].as_f64().unwrap();
    assert!((value - 399.2).abs() <= 0.1, "{value}");
    assert!(std::fs::read_to_string(out.join("nps.txt"))
        .unwrap()
        .contains("399.2"));
}
