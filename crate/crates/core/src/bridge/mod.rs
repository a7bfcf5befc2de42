//! Pluggable leaf-task executors.
//!
//! Every role in a pipeline is served by one [`AgentBackend`]: the
//! deterministic [`ReferenceBackend`], the seeded [`ErrorModelBackend`] that
//! corrupts a configurable fraction of answers, or the [`LlmBackend`] that
//! asks a chat-completion endpoint using the stored role prompts.

mod corrupt;
mod error_model;
mod llm;
pub mod prompts;

pub use corrupt::Corruption;
pub use error_model::{inject_error, Band, ErrorModelBackend, ErrorModelConfig};
pub use llm::{
    extract_response, invoke_llm, self_check, ChatMessage, ChatTransport, HttpTransport,
    LlmBackend, LlmEndpointConfig, TransportError,
};

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{respond, AgentRequest, AgentResponse, Role};

/// Why a backend produced no usable response. In a pipeline every variant
/// ends the run as an agent error.
#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "failure", content = "detail")]
pub enum AgentFailure {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("no schema-valid response after {attempts} attempts: {detail}")]
    Malformed { attempts: u32, detail: String },
    #[error("request rejected: {0}")]
    Rejected(String),
    #[error("difficulty {0} is outside every configured band")]
    OutOfBand(u64),
    #[error("backend serves `{expected}`, got a `{found}` request")]
    WrongRole { expected: Role, found: Role },
}

/// A backend's answer plus the raw text exchanged to produce it.
#[derive(Debug, Clone, PartialEq)]
pub struct Reply {
    pub response: Result<AgentResponse, AgentFailure>,
    /// Verbatim completions (LLM) or empty.
    pub transcript: Vec<String>,
}

impl Reply {
    pub fn ok(response: AgentResponse) -> Self {
        Self { response: Ok(response), transcript: Vec::new() }
    }

    pub fn failed(failure: AgentFailure) -> Self {
        Self { response: Err(failure), transcript: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Reference,
    Llm,
    ErrorModel,
}

/// Executes one role's leaf task.
pub trait AgentBackend: Send + Sync {
    fn role(&self) -> Role;
    fn kind(&self) -> BackendKind;
    /// Short identifier used in traces and tractability marks.
    fn id(&self) -> String {
        format!("{}:{}", self.role(), serde_json::to_value(self.kind()).unwrap().as_str().unwrap())
    }
    fn call(&self, request: &AgentRequest) -> Reply;
}

fn role_guard(expected: Role, request: &AgentRequest) -> Result<(), AgentFailure> {
    if request.role() == expected {
        Ok(())
    } else {
        Err(AgentFailure::WrongRole { expected, found: request.role() })
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceBackend {
    role: Role,
}

impl ReferenceBackend {
    pub fn new(role: Role) -> Self {
        Self { role }
    }
}

impl AgentBackend for ReferenceBackend {
    fn role(&self) -> Role {
        self.role
    }

    fn kind(&self) -> BackendKind {
        BackendKind::Reference
    }

    fn call(&self, request: &AgentRequest) -> Reply {
        if let Err(e) = role_guard(self.role, request) {
            return Reply::failed(e);
        }
        match respond(request) {
            Ok(r) => Reply::ok(r),
            Err(e) => Reply::failed(AgentFailure::Rejected(e.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("invalid error-model config: {0}")]
    ErrorModel(String),
    #[error("invalid endpoint config: {0}")]
    Endpoint(String),
    #[error("role `{0}` has no system prompt")]
    NoPrompt(Role),
}

/// Declarative backend choice for one role; [`BackendConfig::build`] makes a
/// fresh, independent instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BackendConfig {
    Reference,
    ErrorModel(ErrorModelConfig),
    Llm {
        endpoint: LlmEndpointConfig,
        #[serde(default)]
        self_check: bool,
    },
}

impl BackendConfig {
    pub fn kind(&self) -> BackendKind {
        match self {
            BackendConfig::Reference => BackendKind::Reference,
            BackendConfig::ErrorModel(_) => BackendKind::ErrorModel,
            BackendConfig::Llm { .. } => BackendKind::Llm,
        }
    }

    pub fn validate(&self, role: Role) -> Result<(), BridgeError> {
        match self {
            BackendConfig::Reference => Ok(()),
            BackendConfig::ErrorModel(cfg) => cfg.validate(),
            BackendConfig::Llm { endpoint, self_check: check } => {
                endpoint.validate()?;
                if prompts::system_prompt(role).is_none() {
                    return Err(BridgeError::NoPrompt(role));
                }
                if *check && prompts::self_check_prompt(role).is_none() {
                    return Err(BridgeError::Endpoint(format!("role `{role}` has no self-check prompt")));
                }
                Ok(())
            }
        }
    }

    /// Builds a backend for `role`. `stream` perturbs the error model's seed
    /// so that concurrent runs draw independent corruption sequences.
    pub fn build(
        &self,
        role: Role,
        stream: u64,
        transport: Option<Arc<dyn ChatTransport>>,
    ) -> Result<Box<dyn AgentBackend>, BridgeError> {
        self.validate(role)?;
        Ok(match self {
            BackendConfig::Reference => Box::new(ReferenceBackend::new(role)),
            BackendConfig::ErrorModel(cfg) => {
                let mut cfg = cfg.clone();
                cfg.seed = crate::seed::mix(cfg.seed, stream);
                Box::new(ErrorModelBackend::new(role, cfg)?)
            }
            BackendConfig::Llm { endpoint, self_check } => {
                let transport = match transport {
                    Some(t) => t,
                    None => Arc::new(HttpTransport::new(endpoint)?),
                };
                Box::new(
                    LlmBackend::new(role, endpoint.clone(), transport)?.with_self_check(*self_check),
                )
            }
        })
    }
}
