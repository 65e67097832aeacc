//! HTTP service for live human play.
//!
//! A session wraps one episode. The client fetches the current observation,
//! posts a reply tagged with the observation's sequence number, and closes
//! the session when the episode ends. Completed recorded episodes go to
//! `human_log.jsonl`; warm-ups go to `warmups.jsonl`, which scoring never
//! reads. Recorded play for a game unlocks after ten completed warm-ups.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use omniplay::digest::ContentHasher;
use omniplay::{create_env, Difficulty, EnvDescriptor, EpisodeDriver, EpisodeRecord, GameId};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::attachments::Attachments;
use crate::error::Result;
use crate::score::participant;
use crate::seeds::SeedManifest;
use crate::store;

pub const REQUIRED_WARMUPS: usize = 10;
pub const THINK_TIME_FILE: &str = "think_times.jsonl";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Warmup,
    Recorded,
}

#[derive(Clone, Debug, Deserialize)]
pub struct CreateSession {
    pub game: GameId,
    pub difficulty: Difficulty,
    pub participant: String,
    pub mode: Mode,
    /// Warm-ups only; recorded seeds come from the manifest.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct PostAction {
    pub seq: u64,
    pub reply: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GameTally {
    pub warmups: usize,
    pub recorded: BTreeMap<Difficulty, usize>,
    pub recorded_unlocked: bool,
}

struct Session {
    participant: String,
    mode: Mode,
    driver: EpisodeDriver,
    seq: u64,
    shown_at: Instant,
    think_ms: Vec<u64>,
    assets: Option<(u64, Attachments)>,
}

impl Session {
    fn attachments(&mut self) -> Result<&Attachments> {
        if self.assets.as_ref().is_none_or(|(seq, _)| *seq != self.seq) {
            let att = Attachments::encode(self.driver.observation())?;
            self.assets = Some((self.seq, att));
        }
        Ok(&self.assets.as_ref().expect("cached").1)
    }
}

type Tallies = HashMap<String, BTreeMap<GameId, GameTally>>;

pub struct ServiceState {
    data_dir: PathBuf,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    tallies: Mutex<Tallies>,
    log_lock: Mutex<()>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

impl ServiceState {
    /// Opens `data_dir`, rebuilding tallies from the existing logs.
    pub fn open(data_dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(data_dir).map_err(crate::error::io_err(data_dir))?;
        let mut tallies: Tallies = HashMap::new();
        for (file, mode) in [
            (store::HUMAN_LOG_FILE, Mode::Recorded),
            (store::WARMUP_LOG_FILE, Mode::Warmup),
        ] {
            let path = data_dir.join(file);
            if !path.exists() {
                continue;
            }
            for r in store::read_jsonl::<EpisodeRecord>(&path)? {
                if let Some(p) = participant(&r) {
                    count(&mut tallies, p, &r, mode);
                }
            }
        }
        Ok(Self {
            data_dir: data_dir.to_path_buf(),
            sessions: Mutex::new(HashMap::new()),
            tallies: Mutex::new(tallies),
            log_lock: Mutex::new(()),
        })
    }

    fn tally(&self, who: &str, game: GameId) -> GameTally {
        let mut t = lock(&self.tallies)
            .get(who)
            .and_then(|g| g.get(&game))
            .cloned()
            .unwrap_or_default();
        t.recorded_unlocked = t.warmups >= REQUIRED_WARMUPS;
        t
    }

    fn session(&self, id: &str) -> std::result::Result<Arc<Mutex<Session>>, ApiError> {
        lock(&self.sessions)
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("no open session {id}")))
    }
}

fn count(tallies: &mut Tallies, who: &str, r: &EpisodeRecord, mode: Mode) {
    let t = tallies
        .entry(who.to_string())
        .or_default()
        .entry(r.descriptor.game_id)
        .or_default();
    match mode {
        Mode::Warmup => t.warmups += 1,
        Mode::Recorded => *t.recorded.entry(r.descriptor.difficulty).or_default() += 1,
    }
}

/// A seed outside every manifest (manifest seeds stay below 2^53).
fn warmup_seed(who: &str, game: GameId, n: usize) -> u64 {
    let mut h = ContentHasher::new("warmup-seed");
    h.str(who).str(game.as_str()).u64(n as u64);
    let d = h.finish();
    let mut head = [0u8; 8];
    head.copy_from_slice(&d.0[..8]);
    u64::from_le_bytes(head) | (1 << 60)
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({"error": self.1}))).into_response()
    }
}

impl From<crate::error::HarnessError> for ApiError {
    fn from(e: crate::error::HarnessError) -> Self {
        ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

impl From<omniplay::Error> for ApiError {
    fn from(e: omniplay::Error) -> Self {
        ApiError(StatusCode::BAD_REQUEST, e.to_string())
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;
type Shared = State<Arc<ServiceState>>;

pub fn router(state: Arc<ServiceState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/observation", get(observation))
        .route("/sessions/{id}/frame.png", get(frame))
        .route("/sessions/{id}/audio.wav", get(audio))
        .route("/sessions/{id}/video/{index}", get(video_frame))
        .route("/sessions/{id}/action", post(action))
        .route("/sessions/{id}/status", get(status))
        .route("/sessions/{id}/close", post(close))
        .route("/participants/{id}", get(participant_tally))
        .with_state(state)
}

async fn create_session(
    State(st): Shared,
    Json(req): Json<CreateSession>,
) -> ApiResult<Json<Value>> {
    if req.participant.trim().is_empty() || req.participant.contains('/') {
        return Err(ApiError(
            StatusCode::BAD_REQUEST,
            "participant id must be non-empty without '/'".into(),
        ));
    }
    let tally = st.tally(&req.participant, req.game);
    let (seed, episode_index) = match req.mode {
        Mode::Warmup => (
            req.seed
                .unwrap_or_else(|| warmup_seed(&req.participant, req.game, tally.warmups)),
            None,
        ),
        Mode::Recorded => {
            if req.seed.is_some() {
                return Err(ApiError(
                    StatusCode::BAD_REQUEST,
                    "recorded sessions use manifest seeds".into(),
                ));
            }
            if !tally.recorded_unlocked {
                return Err(ApiError(
                    StatusCode::FORBIDDEN,
                    format!(
                        "recorded play unlocks after {REQUIRED_WARMUPS} warm-ups; {} completed",
                        tally.warmups
                    ),
                ));
            }
            let busy = lock(&st.sessions).values().any(|s| {
                let s = lock(s);
                s.mode == Mode::Recorded
                    && s.participant == req.participant
                    && s.driver.descriptor().game_id == req.game
                    && s.driver.descriptor().difficulty == req.difficulty
            });
            if busy {
                return Err(ApiError(
                    StatusCode::CONFLICT,
                    "a recorded session for this task is already open".into(),
                ));
            }
            let manifest = SeedManifest::builtin(req.game);
            let done = tally.recorded.get(&req.difficulty).copied().unwrap_or(0);
            (manifest.seeds[done % manifest.seeds.len()], Some(done))
        }
    };
    let descriptor = EnvDescriptor::new(req.game, req.difficulty, seed)?;
    let driver = EpisodeDriver::new(create_env(descriptor)?, None)?;
    let id = uuid::Uuid::new_v4().to_string();
    let body = json!({
        "session_id": id,
        "game": req.game,
        "difficulty": req.difficulty,
        "mode": req.mode,
        "episode_index": episode_index,
        "system_prompt": driver.system_prompt(),
        "started_ms": now_ms(),
    });
    let session = Session {
        participant: req.participant,
        mode: req.mode,
        driver,
        seq: 0,
        shown_at: Instant::now(),
        think_ms: Vec::new(),
        assets: None,
    };
    lock(&st.sessions).insert(id, Arc::new(Mutex::new(session)));
    Ok(Json(body))
}

fn finished(id: &str) -> ApiError {
    ApiError(
        StatusCode::CONFLICT,
        format!("session {id} has finished; close it"),
    )
}

async fn observation(State(st): Shared, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let handle = st.session(&id)?;
    let mut s = lock(&handle);
    if s.driver.is_done() {
        return Err(finished(&id));
    }
    s.shown_at = Instant::now();
    let seq = s.seq;
    let obs = s.driver.observation().clone();
    let space = s.driver.action_space();
    let system_prompt = s.driver.system_prompt().to_string();
    let att = s.attachments()?;
    let base = format!("/sessions/{id}");
    let video: Vec<Value> = att
        .video
        .iter()
        .map(|(e, _)| json!({"url": format!("{base}/video/{}", e.index), "timestamp_ms": e.timestamp_ms}))
        .collect();
    Ok(Json(json!({
        "session_id": id,
        "seq": seq,
        "step_index": obs.step_index,
        "system_prompt": system_prompt,
        "prompt": obs.turn_prompt(),
        "channels": obs.channels(),
        "transcript": att.transcript,
        "frame_url": att.frame_png.as_ref().map(|_| format!("{base}/frame.png")),
        "audio_url": att.audio_wav.as_ref().map(|_| format!("{base}/audio.wav")),
        "video": video,
        "action_space": space,
    })))
}

fn binary(kind: &'static str, bytes: Option<Vec<u8>>, what: &str) -> ApiResult<Response> {
    let bytes =
        bytes.ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("no {what} this step")))?;
    Ok(([(header::CONTENT_TYPE, kind)], bytes).into_response())
}

async fn frame(State(st): Shared, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let handle = st.session(&id)?;
    let mut s = lock(&handle);
    let png = s.attachments()?.frame_png.clone();
    binary("image/png", png, "frame")
}

async fn audio(State(st): Shared, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let handle = st.session(&id)?;
    let mut s = lock(&handle);
    let wav = s.attachments()?.audio_wav.clone();
    binary("audio/wav", wav, "audio")
}

async fn video_frame(
    State(st): Shared,
    UrlPath((id, index)): UrlPath<(String, usize)>,
) -> ApiResult<Response> {
    let handle = st.session(&id)?;
    let mut s = lock(&handle);
    let png = s.attachments()?.video.get(index).map(|(_, b)| b.clone());
    binary("image/png", png, "such video frame")
}

async fn action(
    State(st): Shared,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<PostAction>,
) -> ApiResult<Json<Value>> {
    let handle = st.session(&id)?;
    let mut s = lock(&handle);
    if s.driver.is_done() {
        return Err(finished(&id));
    }
    if req.seq != s.seq {
        return Err(ApiError(
            StatusCode::CONFLICT,
            format!("stale sequence number {}; current is {}", req.seq, s.seq),
        ));
    }
    let envelope = s.driver.parse(&req.reply);
    if !envelope.valid {
        return Err(ApiError(
            StatusCode::UNPROCESSABLE_ENTITY,
            "no legal action found in the reply; state unchanged".into(),
        ));
    }
    let think = s.shown_at.elapsed().as_millis() as u64;
    s.think_ms.push(think);
    let report = s.driver.submit_envelope(envelope);
    s.seq += 1;
    s.shown_at = Instant::now();
    Ok(Json(json!({
        "seq": s.seq,
        "step_index": report.step_index,
        "note": report.note,
        "done": report.done,
        "outcome": report.outcome,
    })))
}

async fn status(State(st): Shared, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let handle = st.session(&id)?;
    let s = lock(&handle);
    let d = s.driver.descriptor();
    Ok(Json(json!({
        "session_id": id,
        "participant": s.participant,
        "mode": s.mode,
        "game": d.game_id,
        "difficulty": d.difficulty,
        "seq": s.seq,
        "steps": s.driver.steps().len(),
        "step_cap": d.step_cap,
        "done": s.driver.is_done(),
        "outcome": s.driver.outcome(),
    })))
}

async fn close(State(st): Shared, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let handle = lock(&st.sessions)
        .remove(&id)
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("no open session {id}")))?;
    let session = match Arc::try_unwrap(handle) {
        Ok(m) => m.into_inner().unwrap_or_else(|p| p.into_inner()),
        Err(shared) => {
            lock(&st.sessions).insert(id.clone(), shared);
            return Err(ApiError(StatusCode::CONFLICT, "session busy; retry".into()));
        }
    };
    let Session {
        participant,
        mode,
        driver,
        think_ms,
        ..
    } = session;
    if !driver.is_done() {
        let record = driver.abort(
            &format!("human/{participant}"),
            "closed before the episode finished",
        );
        return Ok(Json(
            json!({"logged": false, "outcome": record.outcome, "steps": record.steps.len()}),
        ));
    }
    let record = driver.finish(&format!("human/{participant}"));
    let file = match mode {
        Mode::Recorded => store::HUMAN_LOG_FILE,
        Mode::Warmup => store::WARMUP_LOG_FILE,
    };
    {
        let _guard = lock(&st.log_lock);
        store::append_jsonl(&st.data_dir.join(file), &record)?;
        if mode == Mode::Recorded {
            let sidecar = json!({
                "session_id": id,
                "participant": participant,
                "record_digest": record.digest(),
                "think_ms": think_ms,
            });
            store::append_jsonl(&st.data_dir.join(THINK_TIME_FILE), &sidecar)?;
        }
        count(&mut lock(&st.tallies), &participant, &record, mode);
    }
    Ok(Json(json!({
        "logged": true,
        "log": file,
        "outcome": record.outcome,
        "steps": record.steps.len(),
        "record_digest": record.digest(),
        "tally": st.tally(&participant, record.descriptor.game_id),
    })))
}

async fn participant_tally(State(st): Shared, UrlPath(who): UrlPath<String>) -> Json<Value> {
    let games: BTreeMap<GameId, GameTally> = GameId::ALL
        .iter()
        .map(|&g| (g, st.tally(&who, g)))
        .collect();
    Json(json!({
        "participant": who,
        "required_warmups": REQUIRED_WARMUPS,
        "games": games,
    }))
}

pub async fn serve(addr: SocketAddr, data_dir: &Path) -> anyhow::Result<()> {
    let state = Arc::new(ServiceState::open(data_dir)?);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await?;
    Ok(())
}

/// A service on its own runtime thread, stopped when dropped.
pub struct BackgroundService {
    pub addr: SocketAddr,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl BackgroundService {
    pub fn start(data_dir: &Path) -> anyhow::Result<Self> {
        let state = Arc::new(ServiceState::open(data_dir)?);
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()?;
        let listener = runtime.block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))?;
        let addr = listener.local_addr()?;
        let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            runtime.block_on(async move {
                let _ = axum::serve(listener, router(state))
                    .with_graceful_shutdown(async {
                        let _ = stopped.await;
                    })
                    .await;
            });
        });
        Ok(Self {
            addr,
            stop: Some(stop),
            thread: Some(thread),
        })
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}{path}", self.addr)
    }
}

impl Drop for BackgroundService {
    fn drop(&mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}
