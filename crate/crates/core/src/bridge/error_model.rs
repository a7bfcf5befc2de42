use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::corrupt::{corrupt, Corruption};
use super::{role_guard, AgentBackend, AgentFailure, BackendKind, BridgeError, Reply};
use crate::agents::{respond, AgentRequest, AgentResponse, Role};

/// Accuracy for requests whose difficulty lies in `[lo, hi]`; a missing
/// `hi` leaves the band open above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub lo: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<u64>,
    pub accuracy: f64,
}

impl Band {
    pub fn new(lo: u64, hi: u64, accuracy: f64) -> Self {
        Self { lo, hi: Some(hi), accuracy }
    }

    pub fn open(lo: u64, accuracy: f64) -> Self {
        Self { lo, hi: None, accuracy }
    }

    pub fn contains(&self, difficulty: u64) -> bool {
        difficulty >= self.lo && self.hi.is_none_or(|hi| difficulty <= hi)
    }

    pub fn label(&self) -> String {
        match self.hi {
            Some(hi) => format!("{}-{}", self.lo, hi),
            None => format!("{}+", self.lo),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorModelConfig {
    pub bands: Vec<Band>,
    #[serde(default)]
    pub corruption: Corruption,
    #[serde(default)]
    pub seed: u64,
}

impl ErrorModelConfig {
    pub fn new(bands: Vec<Band>, corruption: Corruption, seed: u64) -> Self {
        Self { bands, corruption, seed }
    }

    /// Same accuracy for every difficulty.
    pub fn uniform(accuracy: f64, seed: u64) -> Self {
        Self::new(vec![Band::open(0, accuracy)], Corruption::Auto, seed)
    }

    pub fn validate(&self) -> Result<(), BridgeError> {
        let err = |m: String| Err(BridgeError::ErrorModel(m));
        if self.bands.is_empty() {
            return err("no bands".into());
        }
        for b in &self.bands {
            if !(0.0..=1.0).contains(&b.accuracy) {
                return err(format!("band {} accuracy {} outside [0, 1]", b.label(), b.accuracy));
            }
            if b.hi.is_some_and(|hi| hi < b.lo) {
                return err(format!("band {} is empty", b.label()));
            }
        }
        let mut sorted = self.bands.clone();
        sorted.sort_by_key(|b| b.lo);
        for w in sorted.windows(2) {
            if w[0].hi.is_none_or(|hi| hi >= w[1].lo) {
                return err(format!("bands {} and {} overlap", w[0].label(), w[1].label()));
            }
        }
        Ok(())
    }

    pub fn band_for(&self, difficulty: u64) -> Option<&Band> {
        self.bands.iter().find(|b| b.contains(difficulty))
    }
}

/// Returns `reference` with probability equal to the band accuracy of
/// `request`'s difficulty and a schema-valid wrong answer otherwise.
///
/// The outcome depends only on `(cfg.seed, call_index)`: the draw for call
/// `k` comes from ChaCha8 stream `k`, so raising a band's accuracy can only
/// turn wrong answers into right ones.
pub fn inject_error(
    request: &AgentRequest,
    reference: &AgentResponse,
    cfg: &ErrorModelConfig,
    call_index: u64,
) -> Result<AgentResponse, AgentFailure> {
    let difficulty = request.difficulty();
    let band = cfg.band_for(difficulty).ok_or(AgentFailure::OutOfBand(difficulty))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(call_index);
    let u: f64 = rng.random();
    if u < band.accuracy {
        Ok(reference.clone())
    } else {
        Ok(corrupt(cfg.corruption, request, reference, &mut rng))
    }
}

/// Seeded error-injecting stand-in for one role. Calls are numbered by an
/// atomic counter, so a shared instance stays deterministic only under a
/// deterministic call order; concurrent runs should each build their own.
#[derive(Debug)]
pub struct ErrorModelBackend {
    role: Role,
    cfg: ErrorModelConfig,
    calls: AtomicU64,
}

impl ErrorModelBackend {
    pub fn new(role: Role, cfg: ErrorModelConfig) -> Result<Self, BridgeError> {
        cfg.validate()?;
        Ok(Self { role, cfg, calls: AtomicU64::new(0) })
    }

    pub fn config(&self) -> &ErrorModelConfig {
        &self.cfg
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl AgentBackend for ErrorModelBackend {
    fn role(&self) -> Role {
        self.role
    }

    fn kind(&self) -> BackendKind {
        BackendKind::ErrorModel
    }

    fn call(&self, request: &AgentRequest) -> Reply {
        if let Err(e) = role_guard(self.role, request) {
            return Reply::failed(e);
        }
        let index = self.calls.fetch_add(1, Ordering::SeqCst);
        let reference = match respond(request) {
            Ok(r) => r,
            Err(e) => return Reply::failed(AgentFailure::Rejected(e.to_string())),
        };
        Reply {
            response: inject_error(request, &reference, &self.cfg, index),
            transcript: Vec::new(),
        }
    }
}
