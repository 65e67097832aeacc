use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};

use omniplay::{create_env, run_episode, Difficulty, EnvDescriptor, EpisodeRecord, GameId};
use omniplay_harness::remote::{RemoteAgent, RemoteConfig};

/// Minimal HTTP endpoint answering every request through `respond`, which
/// sees the request index and body.
struct MockEndpoint {
    url: String,
    bodies: Arc<Mutex<Vec<String>>>,
}

impl MockEndpoint {
    fn start(respond: impl Fn(usize, &str) -> (u16, String) + Send + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat", listener.local_addr().unwrap());
        let bodies = Arc::new(Mutex::new(Vec::new()));
        let seen = Arc::clone(&bodies);
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { return };
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut length = 0usize;
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                        break;
                    }
                    let lower = line.to_ascii_lowercase();
                    if let Some(v) = lower.strip_prefix("content-length:") {
                        length = v.trim().parse().unwrap_or(0);
                    }
                }
                let mut body = vec![0; length];
                if reader.read_exact(&mut body).is_err() {
                    continue;
                }
                let body = String::from_utf8_lossy(&body).into_owned();
                let index = {
                    let mut b = seen.lock().unwrap();
                    b.push(body.clone());
                    b.len() - 1
                };
                let (status, reply) = respond(index, &body);
                let _ = write!(
                    stream,
                    "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{reply}",
                    reply.len()
                );
            }
        });
        MockEndpoint { url, bodies }
    }

    fn requests(&self) -> usize {
        self.bodies.lock().unwrap().len()
    }
}

fn chat(content: &str) -> String {
    serde_json::json!({"choices": [{"message": {"role": "assistant", "content": content}}]})
        .to_string()
}

fn episode(url: &str, step_cap: u32) -> EpisodeRecord {
    let desc = EnvDescriptor::new(GameId::Pathfinding, Difficulty::Easy, 8)
        .unwrap()
        .with_step_cap(step_cap)
        .unwrap();
    let mut agent = RemoteAgent::new(RemoteConfig::new("remote", url, "test-model"))
        .unwrap()
        .with_sleep(|_| {});
    run_episode(create_env(desc).unwrap(), &mut agent, None).unwrap()
}

#[test]
fn fixed_valid_reply_plays_without_invalid_turns() {
    let mock = MockEndpoint::start(|_, _| (200, chat("ACTION: rotate 90 move 1")));
    let rec = episode(&mock.url, 12);
    assert!(!rec.is_aborted(), "{:?}", rec.note);
    assert_eq!(rec.invalid_count(), 0);
    assert_eq!(mock.requests(), rec.steps.len());
    let first: serde_json::Value = serde_json::from_str(&mock.bodies.lock().unwrap()[0]).unwrap();
    assert_eq!(first["model"], "test-model");
    let parts = first["messages"].as_array().unwrap().last().unwrap()["content"]
        .as_array()
        .unwrap()
        .clone();
    let kinds: Vec<&str> = parts.iter().filter_map(|p| p["type"].as_str()).collect();
    assert!(
        kinds.contains(&"image") && kinds.contains(&"audio_transcript"),
        "{kinds:?}"
    );
}

#[test]
fn action_embedded_in_prose_is_extracted() {
    let mock = MockEndpoint::start(|i, _| {
        (
            200,
            chat(&format!(
                "Turn {i}: the corridor bends left, so\nACTION: rotate -90 move 1\nfingers crossed"
            )),
        )
    });
    let rec = episode(&mock.url, 6);
    assert_eq!(rec.invalid_count(), 0);
    assert_eq!(rec.steps.len(), 6);
}

#[test]
fn persistent_server_errors_abort_after_three_attempts() {
    let mock = MockEndpoint::start(|_, _| (500, "{\"error\":\"overloaded\"}".into()));
    let rec = episode(&mock.url, 6);
    assert!(rec.is_aborted());
    assert!(rec.steps.is_empty());
    assert!(
        rec.note.as_deref().unwrap().contains("transport"),
        "{:?}",
        rec.note
    );
    assert_eq!(mock.requests(), 3);
}

#[test]
fn transient_error_is_retried() {
    let mock = MockEndpoint::start(|i, _| {
        if i == 0 {
            (503, String::new())
        } else {
            (200, chat("ACTION: rotate 0 move 1"))
        }
    });
    let rec = episode(&mock.url, 3);
    assert!(!rec.is_aborted());
    assert_eq!(mock.requests(), 4);
}

#[test]
fn rejected_credentials_abort_immediately() {
    let mock = MockEndpoint::start(|_, _| (401, "{\"error\":\"bad key\"}".into()));
    let rec = episode(&mock.url, 6);
    assert!(rec.is_aborted());
    assert!(
        rec.note.as_deref().unwrap().contains("authentication"),
        "{:?}",
        rec.note
    );
    assert_eq!(mock.requests(), 1);
}
