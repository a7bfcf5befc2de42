use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::Pipeline;
use crate::agents::Role;

pub const TRACE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    IterationBound,
    AgentError,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::IterationBound => "iteration_bound",
            Termination::AgentError => "agent_error",
        }
    }
}

/// One agent call with its raw payloads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub role: Role,
    pub request: Value,
    /// Parsed response payload, absent when the backend produced none.
    #[serde(default)]
    pub response: Option<Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transcript: Vec<String>,
    pub latency_us: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Controller remarks, e.g. field renames between agents.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TraceStep {
    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub schema_version: u32,
    pub pipeline: Pipeline,
    pub instance_id: String,
    pub steps: Vec<TraceStep>,
    /// Item-loop passes (knapsack) or matcher / cover-seeker calls
    /// (assignment).
    pub iterations: u64,
    pub final_answer: Option<u64>,
    pub termination: Termination,
}

impl RunTrace {
    pub(super) fn new(pipeline: Pipeline, instance_id: &str) -> Self {
        Self {
            schema_version: TRACE_SCHEMA_VERSION,
            pipeline,
            instance_id: instance_id.to_string(),
            steps: Vec::new(),
            iterations: 0,
            final_answer: None,
            // overwritten on every exit path
            termination: Termination::AgentError,
        }
    }

    pub fn calls(&self, role: Role) -> usize {
        self.steps.iter().filter(|s| s.role == role).count()
    }

    pub fn steps_for(&self, role: Role) -> impl Iterator<Item = &TraceStep> + '_ {
        self.steps.iter().filter(move |s| s.role == role)
    }

    pub fn is_completed(&self) -> bool {
        self.termination == Termination::Completed
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("traces always serialize")
    }
}
