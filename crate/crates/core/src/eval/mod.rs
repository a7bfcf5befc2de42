//! Agent profiling, end-to-end accuracy, bottleneck ranking and the
//! specialization-advantage calculator.
//!
//! Accuracy is always an exact match: a pipeline answer counts only when it
//! equals the exact solver's optimum, and an agent response only when it
//! satisfies the role's requirement.

mod nfl;
mod profile;
mod system;

pub use nfl::{specialization_advantage, NflOutcome, NflScenario};
pub use profile::{
    find_bottleneck, harvest_requests, profile_agent, AgentProfile, BandAccuracy, DifficultyRange,
    DEFAULT_SAMPLES_PER_BAND,
};
pub use system::{
    evaluate_instances, evaluate_system, generate_batch, RunOutcome, SizeReport, SystemReport,
};

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::agents::Role;
use crate::bridge::{BackendConfig, BridgeError, ChatTransport};
use crate::orchestrator::{BackendAssignment, OrchestratorError, Pipeline, PipelineMismatch};
use crate::problem::ProblemError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no backend configured for role `{0}`")]
    MissingRole(Role),
    #[error(transparent)]
    Bridge(#[from] BridgeError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Pipeline(#[from] PipelineMismatch),
    #[error("at least one band is required")]
    NoBands,
    #[error("at least one size is required")]
    NoSizes,
    #[error("band {band} collected only {found} of {wanted} requests")]
    BandUnfilled { band: String, found: usize, wanted: usize },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

impl From<OrchestratorError> for EvalError {
    fn from(e: OrchestratorError) -> Self {
        EvalError::Pipeline(e.into())
    }
}

/// Backend configuration for each role; instantiated afresh per run.
#[derive(Clone, Default)]
pub struct BackendPlan {
    roles: BTreeMap<Role, BackendConfig>,
    transport: Option<Arc<dyn ChatTransport>>,
}

impl BackendPlan {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reference backends for every role `pipeline` needs.
    pub fn reference(pipeline: Pipeline) -> Self {
        let mut p = Self::new();
        for r in pipeline.required_roles() {
            p.set(r, BackendConfig::Reference);
        }
        p
    }

    pub fn set(&mut self, role: Role, cfg: BackendConfig) -> &mut Self {
        self.roles.insert(role, cfg);
        self
    }

    pub fn with(mut self, role: Role, cfg: BackendConfig) -> Self {
        self.set(role, cfg);
        self
    }

    /// Transport shared by every LLM backend instead of the default HTTP one.
    pub fn with_transport(mut self, transport: Arc<dyn ChatTransport>) -> Self {
        self.transport = Some(transport);
        self
    }

    pub fn get(&self, role: Role) -> Option<&BackendConfig> {
        self.roles.get(&role)
    }

    pub fn roles(&self) -> impl Iterator<Item = (Role, &BackendConfig)> + '_ {
        self.roles.iter().map(|(r, c)| (*r, c))
    }

    pub fn validate(&self, pipeline: Pipeline) -> Result<(), EvalError> {
        for role in pipeline.required_roles() {
            self.roles.get(&role).ok_or(EvalError::MissingRole(role))?.validate(role)?;
        }
        Ok(())
    }

    /// Fresh backends for one run; `stream` decorrelates error models.
    pub fn assignment(&self, pipeline: Pipeline, stream: u64) -> Result<BackendAssignment, EvalError> {
        let mut a = BackendAssignment::new();
        for role in pipeline.required_roles() {
            let cfg = self.roles.get(&role).ok_or(EvalError::MissingRole(role))?;
            a.insert(cfg.build(role, stream, self.transport.clone())?);
        }
        Ok(a)
    }
}

impl std::fmt::Debug for BackendPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.roles.iter().map(|(r, c)| (r, c.kind()))).finish()
    }
}
