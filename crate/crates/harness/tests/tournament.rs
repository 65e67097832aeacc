use std::path::Path;

use omniplay::games::showdown::tournament::{replay_match, MatchRecord};
use omniplay_harness::{store, tournament, TournamentConfig};

fn config(out: &Path, games: usize) -> TournamentConfig {
    let text = std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/tournament.toml"),
    )
    .unwrap();
    let mut cfg = TournamentConfig::parse(&text).unwrap();
    cfg.out = out.to_path_buf();
    cfg.games = games;
    cfg.tick_cap = 150;
    cfg
}

#[test]
fn fifty_games_fill_two_hundred_seats() {
    let tmp = tempfile::tempdir().unwrap();
    let summary = tournament::run(&config(tmp.path(), 50), false).unwrap();
    assert_eq!(summary.matches.len(), 50);
    let seats: u32 = summary.table.rows.iter().map(|r| r.games).sum();
    assert_eq!(seats, 200);
    for m in &summary.matches {
        assert_eq!(replay_match(m).unwrap(), m.result);
    }
    assert!(tmp.path().join("tournament.txt").exists());

    let again = tempfile::tempdir().unwrap();
    let cfg = TournamentConfig {
        concurrency: 1,
        ..config(again.path(), 50)
    };
    let rerun = tournament::run(&cfg, false).unwrap();
    assert_eq!(rerun.matches, summary.matches);
    assert_eq!(rerun.report, summary.report);
}

#[test]
fn interrupted_tournament_resumes_where_it_stopped() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), 12);
    let full = tournament::run(&cfg, false).unwrap();
    let log = tmp.path().join(store::MATCHES_FILE);
    let lines: Vec<String> = std::fs::read_to_string(&log)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    std::fs::write(&log, format!("{}\n", lines[..5].join("\n"))).unwrap();

    let resumed = tournament::run(&cfg, false).unwrap();
    assert_eq!((resumed.resumed, resumed.played), (5, 7));
    assert_eq!(resumed.matches, full.matches);
    let on_disk: Vec<MatchRecord> = store::read_jsonl(&log).unwrap();
    assert_eq!(on_disk, full.matches);

    let mut other = cfg.clone();
    other.seating_seed += 1;
    assert!(
        tournament::run(&other, false).is_err(),
        "foreign log accepted"
    );
}
