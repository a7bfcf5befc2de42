//! Experiment manifest: which backend serves each role.
//!
//! ```toml
//! seed = 7
//! default_kind = "reference"   # roles not listed below
//!
//! [endpoint]
//! base_url = "https://api.example.com/v1"
//! model_name = "some-model"
//! api_key_env = "KTR_API_KEY"
//!
//! [roles.trimmer]
//! kind = "error_model"
//! bands = [{ lo = 1, hi = 8, accuracy = 0.54 }, { lo = 9, accuracy = 0.24 }]
//!
//! [roles.matcher]
//! kind = "llm"
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use ktr_core::agents::Role;
use ktr_core::bridge::{BackendConfig, Band, Corruption, ErrorModelConfig, LlmEndpointConfig};
use ktr_core::eval::BackendPlan;
use ktr_core::orchestrator::Pipeline;
use ktr_core::seed::mix;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Reference,
    ErrorModel,
    Llm,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoleEntry {
    pub kind: Kind,
    #[serde(default)]
    pub bands: Vec<Band>,
    #[serde(default)]
    pub corruption: Corruption,
    #[serde(default)]
    pub self_check: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub default_kind: Option<Kind>,
    pub endpoint: Option<LlmEndpointConfig>,
    #[serde(default)]
    pub roles: BTreeMap<String, RoleEntry>,
}

impl Manifest {
    /// Without a file every role uses its reference backend.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Manifest { default_kind: Some(Kind::Reference), ..Default::default() });
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let m: Manifest = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))?;
        for name in m.roles.keys() {
            name.parse::<Role>().map_err(|e| CliError::Config(format!("roles.{name}: {e}")))?;
        }
        Ok(m)
    }

    fn entry(&self, role: Role) -> Option<RoleEntry> {
        self.roles.get(role.name()).cloned().or_else(|| {
            self.default_kind.map(|kind| RoleEntry {
                kind,
                bands: Vec::new(),
                corruption: Corruption::Auto,
                self_check: false,
            })
        })
    }

    /// Backend for one role; error-model seeds derive from `seed` and the role.
    pub fn backend(&self, role: Role, seed: u64) -> Result<BackendConfig, CliError> {
        let entry = self
            .entry(role)
            .ok_or_else(|| CliError::Config(format!("no backend configured for role `{role}`")))?;
        let cfg = match entry.kind {
            Kind::Reference => BackendConfig::Reference,
            Kind::ErrorModel => BackendConfig::ErrorModel(ErrorModelConfig::new(
                entry.bands,
                entry.corruption,
                mix(seed, role as u64),
            )),
            Kind::Llm => BackendConfig::Llm {
                endpoint: self.endpoint.clone().ok_or_else(|| {
                    CliError::Config(format!("roles.{role}: kind \"llm\" needs an [endpoint] table"))
                })?,
                self_check: entry.self_check,
            },
        };
        cfg.validate(role).map_err(|e| CliError::Config(format!("roles.{role}: {e}")))?;
        Ok(cfg)
    }

    pub fn plan(&self, pipeline: Pipeline, seed: u64) -> Result<BackendPlan, CliError> {
        let mut plan = BackendPlan::new();
        for role in pipeline.required_roles() {
            plan.set(role, self.backend(role, seed)?);
        }
        Ok(plan)
    }
}
