//! HTTP connector for hosted models.
//!
//! Each turn is one POST carrying a provider-neutral chat request: a system
//! message, the recent history as alternating user/assistant text, and a
//! user message whose content parts hold the turn prompt plus image, video
//! frame, audio and transcript attachments.

use std::path::PathBuf;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use omniplay::agents::{AgentConnector, AgentError, AgentRequest, Capabilities};
use omniplay::{EnvDescriptor, Modality};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::attachments::{subsample, Attachments};
use crate::error::{io_err, HarnessError, Result};

fn default_retries() -> u32 {
    2
}
fn default_timeout() -> u64 {
    60
}
fn default_backoff() -> u64 {
    500
}
fn default_frames() -> usize {
    8
}
fn default_true() -> bool {
    true
}
fn default_channels() -> Vec<Modality> {
    Capabilities::all_channels()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteConfig {
    pub id: String,
    pub base_url: String,
    pub model: String,
    /// Environment variable holding a bearer token.
    #[serde(default)]
    pub token_env: Option<String>,
    /// Extra attempts after the first failed one.
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    /// First backoff delay; doubles per retry.
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
    /// Cap on video frames attached per request.
    #[serde(default = "default_frames")]
    pub frames_per_request: usize,
    /// Base64 attachments inline; otherwise files under `attachment_dir`
    /// referenced by `file://` URL.
    #[serde(default = "default_true")]
    pub inline_attachments: bool,
    #[serde(default)]
    pub attachment_dir: Option<PathBuf>,
    #[serde(default = "default_channels")]
    pub channels: Vec<Modality>,
}

impl RemoteConfig {
    pub fn new(id: &str, base_url: &str, model: &str) -> Self {
        Self {
            id: id.into(),
            base_url: base_url.into(),
            model: model.into(),
            token_env: None,
            max_retries: default_retries(),
            timeout_secs: default_timeout(),
            backoff_ms: default_backoff(),
            frames_per_request: default_frames(),
            inline_attachments: true,
            attachment_dir: None,
            channels: default_channels(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() || self.base_url.is_empty() {
            return Err(HarnessError::Config(
                "remote agent needs an id and base_url".into(),
            ));
        }
        if !self.inline_attachments && self.attachment_dir.is_none() {
            return Err(HarnessError::Config(
                "inline_attachments = false requires attachment_dir".into(),
            ));
        }
        if self.timeout_secs == 0 {
            return Err(HarnessError::Config("timeout_secs must be positive".into()));
        }
        Ok(())
    }
}

pub struct RemoteAgent {
    config: RemoteConfig,
    token: Option<String>,
    http: ureq::Agent,
    sleep: fn(Duration),
}

impl RemoteAgent {
    pub fn new(config: RemoteConfig) -> Result<Self> {
        config.validate()?;
        let token = match &config.token_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                HarnessError::Config(format!("environment variable {var} is not set"))
            })?),
            None => None,
        };
        if let Some(dir) = &config.attachment_dir {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let http = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self {
            config,
            token,
            http,
            sleep: std::thread::sleep,
        })
    }

    /// Replaces the backoff sleep, for tests.
    pub fn with_sleep(mut self, sleep: fn(Duration)) -> Self {
        self.sleep = sleep;
        self
    }

    fn wants(&self, m: Modality) -> bool {
        self.config.channels.contains(&m)
    }

    fn attachment(
        &self,
        kind: &str,
        media_type: &str,
        bytes: &[u8],
    ) -> std::result::Result<Value, AgentError> {
        if self.config.inline_attachments {
            return Ok(json!({"type": kind, "media_type": media_type, "data": B64.encode(bytes)}));
        }
        let dir = self.config.attachment_dir.as_ref().expect("validated");
        let ext = if media_type == "audio/wav" {
            "wav"
        } else {
            "png"
        };
        let path = dir.join(format!(
            "{}.{ext}",
            omniplay::digest::Digest::of(bytes).to_hex()
        ));
        if !path.exists() {
            std::fs::write(&path, bytes).map_err(|e| AgentError::Protocol(e.to_string()))?;
        }
        Ok(
            json!({"type": kind, "media_type": media_type, "url": format!("file://{}", path.display())}),
        )
    }

    /// The request body for one turn.
    pub fn request_body(&self, req: &AgentRequest<'_>) -> std::result::Result<Value, AgentError> {
        let text_part = |t: &str| json!({"type": "text", "text": t});
        let mut messages =
            vec![json!({"role": "system", "content": [text_part(req.system_prompt)]})];
        for h in req.history {
            messages.push(json!({"role": "user", "content": [text_part(&h.prompt)]}));
            messages.push(json!({"role": "assistant", "content": [text_part(&h.reply)]}));
        }
        let att = Attachments::encode(req.observation)
            .map_err(|e| AgentError::Protocol(e.to_string()))?;
        let mut parts = vec![text_part(&req.observation.turn_prompt())];
        if self.wants(Modality::Image) {
            if let Some(png) = &att.frame_png {
                parts.push(self.attachment("image", "image/png", png)?);
            }
        }
        if self.wants(Modality::Video) && !att.video.is_empty() {
            for i in subsample(att.video.len(), self.config.frames_per_request) {
                let (entry, png) = &att.video[i];
                let mut part = self.attachment("image", "image/png", png)?;
                part["video_frame"] =
                    json!({"index": entry.index, "timestamp_ms": entry.timestamp_ms});
                parts.push(part);
            }
        }
        if self.wants(Modality::Audio) {
            if let Some(wav) = &att.audio_wav {
                parts.push(self.attachment("audio", "audio/wav", wav)?);
            }
            if let Some(t) = &att.transcript {
                parts.push(json!({"type": "audio_transcript", "text": t}));
            }
        }
        messages.push(json!({"role": "user", "content": parts}));
        Ok(json!({
            "model": self.config.model,
            "messages": messages,
            "metadata": {
                "game": req.descriptor.game_id,
                "difficulty": req.descriptor.difficulty,
                "seed": req.descriptor.seed,
                "step": req.observation.step_index,
                "seat": req.seat,
            },
        }))
    }

    fn post_once(&self, body: &str) -> Attempt {
        let mut call = self
            .http
            .post(&self.config.base_url)
            .header("content-type", "application/json");
        if let Some(token) = &self.token {
            call = call.header("authorization", format!("Bearer {token}"));
        }
        let response = match call.send(body) {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        let status = response.status().as_u16();
        let text = match response.into_body().read_to_string() {
            Ok(t) => t,
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        match status {
            200..=299 => match extract_reply(&text) {
                Some(reply) => Attempt::Done(reply),
                None => Attempt::Fatal(AgentError::Protocol(
                    "response carries no reply text".into(),
                )),
            },
            401 | 403 => Attempt::Fatal(AgentError::Auth(format!("HTTP {status}"))),
            408 | 429 | 500..=599 => Attempt::Retry(format!("HTTP {status}")),
            _ => Attempt::Fatal(AgentError::Protocol(format!(
                "HTTP {status}: {}",
                truncate(&text)
            ))),
        }
    }
}

enum Attempt {
    Done(String),
    Retry(String),
    Fatal(AgentError),
}

fn truncate(s: &str) -> &str {
    match s.char_indices().nth(200) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

impl AgentConnector for RemoteAgent {
    fn agent_id(&self) -> &str {
        &self.config.id
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            channels: self.config.channels.clone(),
            privileged: false,
        }
    }

    fn begin_episode(&mut self, _descriptor: &EnvDescriptor, _seat: usize) {}

    fn act(&mut self, request: &AgentRequest<'_>) -> std::result::Result<String, AgentError> {
        let body = self.request_body(request)?.to_string();
        let mut last = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                (self.sleep)(Duration::from_millis(
                    self.config.backoff_ms << (attempt - 1).min(16),
                ));
            }
            match self.post_once(&body) {
                Attempt::Done(reply) => return Ok(reply),
                Attempt::Fatal(err) => return Err(err),
                Attempt::Retry(why) => last = why,
            }
        }
        Err(AgentError::Transport(format!(
            "{} attempts failed, last: {last}",
            self.config.max_retries + 1
        )))
    }
}

fn content_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Array(parts) => {
            let texts: Vec<&str> = parts
                .iter()
                .filter_map(|p| p.get("text").and_then(Value::as_str).or_else(|| p.as_str()))
                .collect();
            (!texts.is_empty()).then(|| texts.join("\n"))
        }
        _ => None,
    }
}

/// Pulls the reply text out of common response shapes; a non-JSON body is
/// the reply itself.
pub fn extract_reply(body: &str) -> Option<String> {
    let Ok(v) = serde_json::from_str::<Value>(body) else {
        return Some(body.to_string());
    };
    if let Some(c) = v
        .pointer("/choices/0/message/content")
        .and_then(content_text)
    {
        return Some(c);
    }
    for key in ["content", "reply", "text", "output_text"] {
        if let Some(c) = v.get(key).and_then(content_text) {
            return Some(c);
        }
    }
    v.pointer("/message/content").and_then(content_text)
}
