use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::prompts::{self_check_prompt, system_prompt};
use super::{role_guard, AgentBackend, AgentFailure, BackendKind, BridgeError, Reply};
use crate::agents::{AgentRequest, AgentResponse, Role};

fn default_max_retries() -> u32 {
    2
}

fn default_timeout() -> f64 {
    60.0
}

/// OpenAI-compatible chat endpoint. The key is never stored here, only the
/// name of the environment variable holding it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmEndpointConfig {
    pub base_url: String,
    pub model_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
}

impl LlmEndpointConfig {
    pub fn new(base_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model_name: model_name.into(),
            api_key_env: None,
            temperature: 0.0,
            max_retries: default_max_retries(),
            timeout_secs: default_timeout(),
        }
    }

    pub fn validate(&self) -> Result<(), BridgeError> {
        let err = |m: &str| Err(BridgeError::Endpoint(m.to_string()));
        if self.base_url.trim().is_empty() {
            return err("base_url is empty");
        }
        if self.model_name.trim().is_empty() {
            return err("model_name is empty");
        }
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return err("timeout_secs must be positive");
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return err("temperature must be a non-negative number");
        }
        Ok(())
    }

    pub fn attempts(&self) -> u32 {
        self.max_retries.saturating_add(1)
    }

    pub fn completions_url(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: "system".into(), content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: "user".into(), content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: "assistant".into(), content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransportError {
    #[error("endpoint unreachable: {0}")]
    Unreachable(String),
    #[error("endpoint returned HTTP {0}")]
    Status(u16),
    #[error("unexpected response body: {0}")]
    BadBody(String),
}

/// Sends one conversation and returns the completion text.
pub trait ChatTransport: Send + Sync {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, TransportError>;
}

/// Blocking HTTP transport for `{base_url}/chat/completions`.
pub struct HttpTransport {
    agent: ureq::Agent,
    url: String,
    model: String,
    temperature: f64,
    api_key: Option<String>,
}

impl HttpTransport {
    pub fn new(cfg: &LlmEndpointConfig) -> Result<Self, BridgeError> {
        cfg.validate()?;
        let api_key = match &cfg.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                BridgeError::Endpoint(format!("environment variable `{var}` is not set"))
            })?),
            None => None,
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(cfg.timeout_secs)))
            .build()
            .into();
        Ok(Self {
            agent,
            url: cfg.completions_url(),
            model: cfg.model_name.clone(),
            temperature: cfg.temperature,
            api_key,
        })
    }
}

impl ChatTransport for HttpTransport {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, TransportError> {
        let body = json!({
            "model": self.model,
            "messages": messages,
            "temperature": self.temperature,
        });
        let mut req = self.agent.post(&self.url);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let resp = req.send_json(&body).map_err(|e| match e {
            ureq::Error::StatusCode(code) => TransportError::Status(code),
            other => TransportError::Unreachable(other.to_string()),
        })?;
        let v: Value = resp
            .into_body()
            .read_json()
            .map_err(|e| TransportError::BadBody(e.to_string()))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| TransportError::BadBody("no choices[0].message.content".into()))
    }
}

/// First JSON object in `text`, scanning left to right, that is a valid
/// response of `role`. Surrounding prose and non-matching objects are
/// skipped.
pub fn extract_response(role: Role, text: &str) -> Option<AgentResponse> {
    for (i, _) in text.match_indices('{') {
        let mut stream = serde_json::Deserializer::from_str(&text[i..]).into_iter::<Value>();
        if let Some(Ok(v @ Value::Object(_))) = stream.next() {
            if let Ok(r) = AgentResponse::from_payload(role, v) {
                return Some(r);
            }
        }
    }
    None
}

fn converse(
    role: Role,
    messages: &[ChatMessage],
    cfg: &LlmEndpointConfig,
    transport: &dyn ChatTransport,
    transcript: &mut Vec<String>,
) -> Result<(AgentResponse, String), AgentFailure> {
    for _ in 0..cfg.attempts() {
        let text = transport
            .complete(messages)
            .map_err(|e| AgentFailure::Transport(e.to_string()))?;
        transcript.push(text.clone());
        if let Some(r) = extract_response(role, &text) {
            return Ok((r, text));
        }
    }
    Err(AgentFailure::Malformed {
        attempts: cfg.attempts(),
        detail: format!("no valid `{role}` object in the completion"),
    })
}

fn opening(request: &AgentRequest) -> Result<Vec<ChatMessage>, AgentFailure> {
    let role = request.role();
    let system = system_prompt(role)
        .ok_or_else(|| AgentFailure::Rejected(format!("no prompt for `{role}`")))?;
    Ok(vec![
        ChatMessage::system(system),
        ChatMessage::user(request.payload().to_string()),
    ])
}

/// Sends the role prompt and the serialized request, retrying on output
/// that contains no valid response object.
pub fn invoke_llm(
    request: &AgentRequest,
    cfg: &LlmEndpointConfig,
    transport: &dyn ChatTransport,
) -> Reply {
    let mut transcript = Vec::new();
    let response = opening(request)
        .and_then(|m| converse(request.role(), &m, cfg, transport, &mut transcript))
        .map(|(r, _)| r);
    Reply { response, transcript }
}

/// Continues the conversation that produced `first_completion` with the
/// role's double-check prompt and returns the second answer.
pub fn self_check(
    request: &AgentRequest,
    first_completion: &str,
    cfg: &LlmEndpointConfig,
    transport: &dyn ChatTransport,
) -> Reply {
    let role = request.role();
    let mut transcript = Vec::new();
    let response = (|| {
        let check = self_check_prompt(role)
            .ok_or_else(|| AgentFailure::Rejected(format!("`{role}` has no self-check prompt")))?;
        let mut messages = opening(request)?;
        messages.push(ChatMessage::assistant(first_completion));
        messages.push(ChatMessage::user(check));
        converse(role, &messages, cfg, transport, &mut transcript).map(|(r, _)| r)
    })();
    Reply { response, transcript }
}

pub struct LlmBackend {
    role: Role,
    cfg: LlmEndpointConfig,
    transport: Arc<dyn ChatTransport>,
    self_check: bool,
}

impl LlmBackend {
    pub fn new(
        role: Role,
        cfg: LlmEndpointConfig,
        transport: Arc<dyn ChatTransport>,
    ) -> Result<Self, BridgeError> {
        cfg.validate()?;
        if system_prompt(role).is_none() {
            return Err(BridgeError::NoPrompt(role));
        }
        Ok(Self { role, cfg, transport, self_check: false })
    }

    pub fn with_self_check(mut self, on: bool) -> Self {
        self.self_check = on;
        self
    }
}

impl AgentBackend for LlmBackend {
    fn role(&self) -> Role {
        self.role
    }

    fn kind(&self) -> BackendKind {
        BackendKind::Llm
    }

    fn call(&self, request: &AgentRequest) -> Reply {
        if let Err(e) = role_guard(self.role, request) {
            return Reply::failed(e);
        }
        let first = invoke_llm(request, &self.cfg, self.transport.as_ref());
        if !self.self_check || first.response.is_err() {
            return first;
        }
        let last = first.transcript.last().cloned().unwrap_or_default();
        let second = self_check(request, &last, &self.cfg, self.transport.as_ref());
        let mut transcript = first.transcript;
        transcript.extend(second.transcript);
        Reply { response: second.response, transcript }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    /// Replays canned completions and records what it was sent.
    struct Script {
        replies: Mutex<Vec<Result<String, TransportError>>>,
        seen: Mutex<Vec<Vec<ChatMessage>>>,
    }

    impl Script {
        fn new(replies: &[&str]) -> Arc<Self> {
            Arc::new(Self {
                replies: Mutex::new(replies.iter().rev().map(|s| Ok(s.to_string())).collect()),
                seen: Mutex::new(Vec::new()),
            })
        }
    }

    impl ChatTransport for Script {
        fn complete(&self, messages: &[ChatMessage]) -> Result<String, TransportError> {
            self.seen.lock().unwrap().push(messages.to_vec());
            self.replies
                .lock()
                .unwrap()
                .pop()
                .unwrap_or(Err(TransportError::Unreachable("script exhausted".into())))
        }
    }

    fn cfg(retries: u32) -> LlmEndpointConfig {
        LlmEndpointConfig { max_retries: retries, ..LlmEndpointConfig::new("http://stub", "m") }
    }

    fn trimmer() -> AgentRequest {
        AgentRequest::from_payload(
            Role::Trimmer,
            json!({"n_list": [[3,4],[5,9],[9,9]], "capacity": 5}),
        )
        .unwrap()
    }

    #[test]
    fn stub_round_trip() {
        let s = Script::new(&[r#"{"t_list": [[3,4],[5,9]]}"#]);
        let reply = invoke_llm(&trimmer(), &cfg(0), s.as_ref());
        assert_eq!(reply.response.unwrap().payload(), json!({"t_list": [[3,4],[5,9]]}));
        let seen = s.seen.lock().unwrap();
        assert_eq!(seen[0][0].role, "system");
        assert!(seen[0][0].content.starts_with("You are a key member"));
        assert_eq!(seen[0][1].content, r#"{"n_list":[[3,4],[5,9],[9,9]],"capacity":5}"#);
    }

    #[test]
    fn prose_is_discarded() {
        let text = "Let me think {not json}. Over capacity: {\"x\": 1}. Answer:\n{\"t_list\": [[3,4]]}\nDone.";
        let r = extract_response(Role::Trimmer, text).unwrap();
        assert_eq!(r.payload(), json!({"t_list": [[3,4]]}));
        assert!(extract_response(Role::Trimmer, "no object").is_none());
    }

    #[test]
    fn malformed_until_retries_run_out() {
        let s = Script::new(&["nope", "{\"t_list\": 3}", "still nope"]);
        let reply = invoke_llm(&trimmer(), &cfg(2), s.as_ref());
        assert_eq!(reply.transcript.len(), 3);
        assert!(matches!(reply.response, Err(AgentFailure::Malformed { attempts: 3, .. })));
        let s = Script::new(&["nope", "{\"t_list\": []}"]);
        assert!(invoke_llm(&trimmer(), &cfg(1), s.as_ref()).response.is_ok());
    }

    #[test]
    fn transport_failure_is_reported() {
        let s = Script::new(&[]);
        let reply = invoke_llm(&trimmer(), &cfg(3), s.as_ref());
        assert!(matches!(reply.response, Err(AgentFailure::Transport(_))));
    }

    #[test]
    fn self_check_corrects_and_confirms() {
        let s = Script::new(&[r#"{"t_list": [[3,4],[5,9],[9,9]]}"#, r#"{"t_list": [[3,4],[5,9]]}"#]);
        let backend = LlmBackend::new(Role::Trimmer, cfg(0), s.clone()).unwrap().with_self_check(true);
        let reply = backend.call(&trimmer());
        assert_eq!(reply.response.unwrap().payload(), json!({"t_list": [[3,4],[5,9]]}));
        assert_eq!(reply.transcript.len(), 2);
        let seen = s.seen.lock().unwrap();
        assert_eq!(seen[1].len(), 4);
        assert_eq!(seen[1][2].role, "assistant");
        assert!(seen[1][3].content.starts_with("To better fulfill"));
        drop(seen);

        let same = r#"{"t_list": [[3,4],[5,9]]}"#;
        let s = Script::new(&[same, same]);
        let backend = LlmBackend::new(Role::Trimmer, cfg(0), s).unwrap().with_self_check(true);
        let reply = backend.call(&trimmer());
        assert_eq!(reply.transcript[0], reply.transcript[1]);
    }

    #[test]
    fn self_check_not_available_for_worker() {
        let req = AgentRequest::from_payload(Role::Worker, json!({"c_list": [], "s_item": [1,1]})).unwrap();
        let s = Script::new(&[]);
        assert!(matches!(
            self_check(&req, "{}", &cfg(0), s.as_ref()).response,
            Err(AgentFailure::Rejected(_))
        ));
    }

    #[test]
    fn endpoint_config_checks() {
        assert!(LlmEndpointConfig { timeout_secs: 0.0, ..cfg(0) }.validate().is_err());
        assert!(LlmEndpointConfig::new("", "m").validate().is_err());
        assert_eq!(cfg(0).completions_url(), "http://stub/chat/completions");
        let missing = LlmEndpointConfig {
            api_key_env: Some("KTR_SURELY_UNSET_KEY_VAR".into()),
            ..cfg(0)
        };
        assert!(HttpTransport::new(&missing).is_err());
    }
}
