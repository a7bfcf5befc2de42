use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::agents::requirement::satisfies;
use crate::agents::{AgentRequest, Role};
use crate::bridge::AgentBackend;
use crate::orchestrator::{
    run_ksp_pipeline, run_tap_pipeline, run_tap_pipeline_legacy, BackendAssignment, Pipeline,
};
use crate::problem::{generate_assignment, generate_knapsack, AssignmentGenConfig, KnapsackGenConfig};
use crate::seed::mix;

pub const DEFAULT_SAMPLES_PER_BAND: usize = 200;

/// Instances tried before giving up on filling a band.
const HARVEST_LIMIT: usize = 200_000;

/// Knapsack sizes drawn when harvesting; large enough to reach a few hundred
/// feasible states.
const KSP_HARVEST_SIZES: std::ops::RangeInclusive<usize> = 1..=10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifficultyRange {
    pub lo: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<u64>,
}

impl DifficultyRange {
    pub fn new(lo: u64, hi: u64) -> Self {
        Self { lo, hi: Some(hi) }
    }

    pub fn contains(&self, d: u64) -> bool {
        d >= self.lo && self.hi.is_none_or(|hi| d <= hi)
    }

    pub fn label(&self) -> String {
        match self.hi {
            Some(hi) => format!("{}-{}", self.lo, hi),
            None => format!("{}+", self.lo),
        }
    }
}

impl From<crate::bridge::Band> for DifficultyRange {
    fn from(b: crate::bridge::Band) -> Self {
        Self { lo: b.lo, hi: b.hi }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandAccuracy {
    pub band: DifficultyRange,
    pub samples: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub role: Role,
    pub backend: String,
    pub bands: Vec<BandAccuracy>,
}

impl AgentProfile {
    /// Builds a profile from given per-band accuracies, e.g. published ones.
    pub fn from_accuracies(role: Role, backend: &str, bands: &[(DifficultyRange, f64)]) -> Self {
        Self {
            role,
            backend: backend.to_string(),
            bands: bands
                .iter()
                .map(|&(band, accuracy)| BandAccuracy { band, samples: 0, correct: 0, accuracy })
                .collect(),
        }
    }

    pub fn worst(&self) -> f64 {
        self.bands.iter().map(|b| b.accuracy).fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        if self.bands.is_empty() {
            return f64::NAN;
        }
        self.bands.iter().map(|b| b.accuracy).sum::<f64>() / self.bands.len() as f64
    }

    /// `role,band,accuracy,n` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("role,band,accuracy,n\n");
        for b in &self.bands {
            let _ = writeln!(out, "{},{},{:.6},{}", self.role, b.band.label(), b.accuracy, b.samples);
        }
        out
    }
}

fn source_pipeline(role: Role) -> Pipeline {
    match role {
        r if r.is_knapsack() => Pipeline::Ksp,
        Role::CoverSeeker => Pipeline::TapLegacy,
        _ => Pipeline::Tap,
    }
}

/// Collects `per_band` requests for `role` in each band from reference
/// pipeline traces, at most one request per band per instance.
pub fn harvest_requests(
    role: Role,
    bands: &[DifficultyRange],
    per_band: usize,
    seed: u64,
) -> Result<Vec<Vec<AgentRequest>>, EvalError> {
    if bands.is_empty() {
        return Err(EvalError::NoBands);
    }
    let pipeline = source_pipeline(role);
    let refs = BackendAssignment::reference(pipeline);
    let mut out: Vec<Vec<AgentRequest>> = vec![Vec::new(); bands.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, role as u64));
    for i in 0..HARVEST_LIMIT {
        let unfilled: Vec<usize> = (0..bands.len()).filter(|&b| out[b].len() < per_band).collect();
        if unfilled.is_empty() {
            break;
        }
        let inst_seed = mix(seed, i as u64);
        let trace = if pipeline == Pipeline::Ksp {
            let n = rng.random_range(KSP_HARVEST_SIZES);
            let inst = generate_knapsack(n, inst_seed, &KnapsackGenConfig::default())?;
            run_ksp_pipeline(&inst, &refs)?
        } else {
            // matrix size is the difficulty, so aim at a band still open
            let band = bands[unfilled[i % unfilled.len()]];
            let lo = band.lo.max(1);
            let hi = band.hi.unwrap_or(lo + 5).max(lo);
            let n = rng.random_range(lo..=hi) as usize;
            let inst = generate_assignment(n, inst_seed, &AssignmentGenConfig::default())?;
            match pipeline {
                Pipeline::TapLegacy => run_tap_pipeline_legacy(&inst, &refs, None)?,
                _ => run_tap_pipeline(&inst, &refs, None)?,
            }
        };
        let mut taken = vec![false; bands.len()];
        for step in trace.steps_for(role) {
            let req = AgentRequest::from_payload(role, step.request.clone())
                .expect("reference traces carry valid requests");
            let d = req.difficulty();
            if let Some(b) = bands.iter().position(|b| b.contains(d)) {
                if !taken[b] && out[b].len() < per_band {
                    taken[b] = true;
                    out[b].push(req);
                }
            }
        }
    }
    for (b, reqs) in out.iter().enumerate() {
        if reqs.len() < per_band {
            return Err(EvalError::BandUnfilled {
                band: bands[b].label(),
                found: reqs.len(),
                wanted: per_band,
            });
        }
    }
    Ok(out)
}

/// Measures `backend` on harvested requests, band by band. Calls are made
/// sequentially so seeded backends give reproducible profiles.
pub fn profile_agent(
    role: Role,
    backend: &dyn AgentBackend,
    bands: &[DifficultyRange],
    samples_per_band: usize,
    seed: u64,
) -> Result<AgentProfile, EvalError> {
    let requests = harvest_requests(role, bands, samples_per_band, seed)?;
    let bands = bands
        .iter()
        .zip(requests)
        .map(|(&band, reqs)| {
            let correct = reqs
                .iter()
                .filter(|req| matches!(backend.call(req).response, Ok(ref r) if satisfies(req, r)))
                .count();
            let samples = reqs.len();
            BandAccuracy {
                band,
                samples,
                correct,
                accuracy: if samples == 0 { 0.0 } else { correct as f64 / samples as f64 },
            }
        })
        .collect();
    Ok(AgentProfile { role, backend: backend.id(), bands })
}

/// Roles ordered from most to least limiting: ascending worst-band
/// accuracy, then ascending mean. Ties keep input order.
pub fn find_bottleneck(profiles: &[AgentProfile]) -> Vec<Role> {
    let mut ranked: Vec<&AgentProfile> = profiles.iter().collect();
    ranked.sort_by(|a, b| a.worst().total_cmp(&b.worst()).then(a.mean().total_cmp(&b.mean())));
    ranked.into_iter().map(|p| p.role).collect()
}
