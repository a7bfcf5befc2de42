//! System controllers for the knapsack and assignment blueprints.
//!
//! Each run is sequential and owns its [`RunTrace`]. The controller forwards
//! payloads between agents, takes the state-set union (knapsack) and compares
//! the matching or cover size with N (assignment); every other
//! transformation is an agent step recorded in the trace.

mod trace;

pub use trace::{RunTrace, Termination, TraceStep, TRACE_SCHEMA_VERSION};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::wire::*;
use crate::agents::{AgentRequest, AgentResponse, Role};
use crate::blueprint::{catalog, Blueprint};
use crate::bridge::{AgentBackend, ReferenceBackend};
use crate::problem::{AssignmentInstance, KnapsackInstance, Matrix, StateSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    /// Worker, Trimmer, Reporter.
    Ksp,
    /// Reducers, Matcher, Painter, Normalizer, Reporter.
    Tap,
    /// Reducers, Cover Seeker, Normalizer, Reporter, plus a Matcher for the
    /// final assignment.
    TapLegacy,
}

impl Pipeline {
    pub const ALL: [Pipeline; 3] = [Pipeline::Ksp, Pipeline::Tap, Pipeline::TapLegacy];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Ksp => "ksp",
            Pipeline::Tap => "tap",
            Pipeline::TapLegacy => "tap_legacy",
        }
    }

    pub fn blueprint(self) -> Blueprint {
        match self {
            Pipeline::Ksp => catalog::ksp_blueprint(),
            Pipeline::Tap => catalog::tap_blueprint(),
            Pipeline::TapLegacy => catalog::tap_legacy_blueprint(),
        }
    }

    pub fn required_roles(self) -> Vec<Role> {
        let mut roles = catalog::required_roles(&self.blueprint());
        if self == Pipeline::TapLegacy {
            roles.push(Role::Matcher);
        }
        roles
    }

    pub fn is_knapsack(self) -> bool {
        self == Pipeline::Ksp
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pipeline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pipeline::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown pipeline `{s}` (expected ksp, tap or tap_legacy)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrchestratorError {
    #[error("no backend assigned to role `{0}`")]
    MissingRole(Role),
    #[error("max_iters must be at least 1")]
    ZeroIterationBound,
}

/// One backend per role.
#[derive(Default)]
pub struct BackendAssignment {
    backends: BTreeMap<Role, Box<dyn AgentBackend>>,
}

impl BackendAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reference backends for every role of `pipeline`.
    pub fn reference(pipeline: Pipeline) -> Self {
        let mut a = Self::new();
        for role in pipeline.required_roles() {
            a.insert(Box::new(ReferenceBackend::new(role)));
        }
        a
    }

    /// Assigns `backend` to the role it serves, replacing any previous one.
    pub fn insert(&mut self, backend: Box<dyn AgentBackend>) -> &mut Self {
        self.backends.insert(backend.role(), backend);
        self
    }

    pub fn with(mut self, backend: Box<dyn AgentBackend>) -> Self {
        self.insert(backend);
        self
    }

    pub fn get(&self, role: Role) -> Option<&dyn AgentBackend> {
        self.backends.get(&role).map(|b| b.as_ref())
    }

    pub fn roles(&self) -> impl Iterator<Item = Role> + '_ {
        self.backends.keys().copied()
    }

    pub fn check(&self, pipeline: Pipeline) -> Result<(), OrchestratorError> {
        match pipeline.required_roles().into_iter().find(|r| !self.backends.contains_key(r)) {
            Some(r) => Err(OrchestratorError::MissingRole(r)),
            None => Ok(()),
        }
    }
}

impl fmt::Debug for BackendAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.backends.iter().map(|(r, b)| (r, b.id())))
            .finish()
    }
}

/// Marker for a run that must stop; the reason is already in the trace.
struct Halt;

struct Controller<'a> {
    backends: &'a BackendAssignment,
    trace: RunTrace,
}

impl<'a> Controller<'a> {
    fn new(pipeline: Pipeline, instance_id: &str, backends: &'a BackendAssignment) -> Self {
        Self { backends, trace: RunTrace::new(pipeline, instance_id) }
    }

    /// Calls the role's backend, records the step and returns the response
    /// after `check` accepted its shape.
    fn call<T>(
        &mut self,
        request: AgentRequest,
        note: Option<String>,
        check: impl FnOnce(AgentResponse) -> Result<T, String>,
    ) -> Result<T, Halt> {
        let role = request.role();
        let backend = self.backends.get(role).expect("assignment checked before the run");
        let started = Instant::now();
        let reply = backend.call(&request);
        let latency_us = started.elapsed().as_micros() as u64;
        let mut step = TraceStep {
            role,
            request: request.payload(),
            response: None,
            transcript: reply.transcript,
            latency_us,
            error: None,
            note,
        };
        let outcome = match reply.response {
            Ok(resp) => {
                step.response = Some(resp.payload());
                if resp.role() != role {
                    Err(format!("expected a `{role}` response, got `{}`", resp.role()))
                } else {
                    check(resp)
                }
            }
            Err(failure) => Err(failure.to_string()),
        };
        match outcome {
            Ok(v) => {
                self.trace.steps.push(step);
                Ok(v)
            }
            Err(e) => {
                step.error = Some(e);
                self.trace.steps.push(step);
                self.trace.termination = Termination::AgentError;
                Err(Halt)
            }
        }
    }

    fn finish(mut self, answer: Result<u64, Halt>) -> RunTrace {
        if let Ok(a) = answer {
            self.trace.final_answer = Some(a);
            self.trace.termination = Termination::Completed;
        }
        self.trace
    }
}

fn square(rows: WireMatrix, n: usize) -> Result<Matrix, String> {
    let m = Matrix::from_rows(rows).map_err(|e| e.to_string())?;
    if m.size() != n {
        return Err(format!("expected a {n}x{n} matrix, got {0}x{0}", m.size()));
    }
    Ok(m)
}

fn cells_in_bounds(cells: &[WireCell], n: usize) -> Result<(), String> {
    matching_from_cells(cells, n).map(|_| ()).map_err(|e| e.to_string())
}

fn cover_in_bounds(c: &CoverResponse, n: usize) -> Result<(), String> {
    if c.to_cover().in_bounds(n) {
        Ok(())
    } else {
        Err("cover index out of bounds".into())
    }
}

/// Item loop: `S_add = worker(S, item)`, `S_trim = trimmer(S_add, W)`,
/// `S = S ∪ S_trim`, then the reporter on the final set.
pub fn run_ksp_pipeline(
    inst: &KnapsackInstance,
    backends: &BackendAssignment,
) -> Result<RunTrace, OrchestratorError> {
    backends.check(Pipeline::Ksp)?;
    let mut c = Controller::new(Pipeline::Ksp, &inst.id, backends);
    let answer = (|| {
        let mut states = StateSet::initial();
        for &item in inst.items() {
            c.trace.iterations += 1;
            let n_list = c.call(
                AgentRequest::Worker(WorkerRequest { c_list: states.to_vec(), s_item: item }),
                None,
                |r| match r {
                    AgentResponse::Worker(w) => Ok(w.n_list),
                    _ => unreachable!(),
                },
            )?;
            let t_list = c.call(
                AgentRequest::Trimmer(TrimmerRequest { n_list, capacity: inst.capacity() }),
                None,
                |r| match r {
                    AgentResponse::Trimmer(t) => Ok(t.t_list),
                    _ => unreachable!(),
                },
            )?;
            states = states.union(&t_list.into_iter().collect());
        }
        c.call(
            AgentRequest::KspReporter(KspReportRequest { c_list: states.to_vec() }),
            None,
            |r| match r {
                AgentResponse::KspReporter(k) => Ok(k.max_value),
                _ => unreachable!(),
            },
        )
    })();
    Ok(c.finish(answer))
}

pub fn default_max_iters(n: usize) -> u64 {
    ((n * n) as u64).max(1)
}

fn reduce(c: &mut Controller<'_>, original: &Matrix) -> Result<Matrix, Halt> {
    let n = original.size();
    let rows = c.call(AgentRequest::RowReducer(MatrixRequest::new(original)), None, |r| match r {
        AgentResponse::RowReducer(m) => square(m.reduced_matrix, n),
        _ => unreachable!(),
    })?;
    c.call(AgentRequest::ColReducer(MatrixRequest::new(&rows)), None, |r| match r {
        AgentResponse::ColReducer(m) => square(m.reduced_matrix, n),
        _ => unreachable!(),
    })
}

fn normalize_step(
    c: &mut Controller<'_>,
    current: &Matrix,
    cover: CoverResponse,
) -> Result<Matrix, Halt> {
    let n = current.size();
    let request = AgentRequest::Normalizer(NormalizerRequest {
        matrix: current.to_rows(),
        collumn_collection: cover.collum_collection,
        row_collection: cover.row_collection,
    });
    let note = Some("collum_collection -> collumn_collection".to_string());
    c.call(request, note, |r| match r {
        AgentResponse::Normalizer(m) => square(m.normalized_matrix, n),
        _ => unreachable!(),
    })
}

fn report(c: &mut Controller<'_>, original: &Matrix, collection: Vec<WireCell>) -> Result<u64, Halt> {
    let request = AgentRequest::TapReporter(TapReportRequest { matrix: original.to_rows(), collection });
    c.call(request, None, |r| match r {
        AgentResponse::TapReporter(t) => Ok(t.total_value),
        _ => unreachable!(),
    })
}

fn find_matching(c: &mut Controller<'_>, current: &Matrix) -> Result<Vec<WireCell>, Halt> {
    let n = current.size();
    c.call(AgentRequest::Matcher(MatrixRequest::new(current)), None, |r| match r {
        AgentResponse::Matcher(m) => {
            cells_in_bounds(&m.largest_collection, n)?;
            Ok(m.largest_collection)
        }
        _ => unreachable!(),
    })
}

/// Row and column reduction, then repeat: Matcher; stop when the matching
/// has N cells, otherwise Painter and Normalizer. One iteration is one
/// Matcher call.
pub fn run_tap_pipeline(
    inst: &AssignmentInstance,
    backends: &BackendAssignment,
    max_iters: Option<u64>,
) -> Result<RunTrace, OrchestratorError> {
    backends.check(Pipeline::Tap)?;
    let n = inst.size();
    let bound = max_iters.unwrap_or_else(|| default_max_iters(n));
    if bound == 0 {
        return Err(OrchestratorError::ZeroIterationBound);
    }
    let original = &inst.cost_matrix;
    let mut c = Controller::new(Pipeline::Tap, &inst.id, backends);
    let answer = (|| {
        let mut current = reduce(&mut c, original)?;
        loop {
            if c.trace.iterations >= bound {
                c.trace.termination = Termination::IterationBound;
                return Err(Halt);
            }
            c.trace.iterations += 1;
            let matching = find_matching(&mut c, &current)?;
            if matching.len() == n {
                return report(&mut c, original, matching);
            }
            let request = AgentRequest::Painter(PainterRequest {
                matrix: current.to_rows(),
                collection: matching,
            });
            let cover = c.call(request, None, |r| match r {
                AgentResponse::Painter(p) => {
                    cover_in_bounds(&p, n)?;
                    Ok(p)
                }
                _ => unreachable!(),
            })?;
            current = normalize_step(&mut c, &current, cover)?;
        }
    })();
    Ok(c.finish(answer))
}

/// Same loop with a Cover Seeker: stop when the cover has N lines, then
/// let the Matcher pick the assignment for the Reporter.
pub fn run_tap_pipeline_legacy(
    inst: &AssignmentInstance,
    backends: &BackendAssignment,
    max_iters: Option<u64>,
) -> Result<RunTrace, OrchestratorError> {
    backends.check(Pipeline::TapLegacy)?;
    let n = inst.size();
    let bound = max_iters.unwrap_or_else(|| default_max_iters(n));
    if bound == 0 {
        return Err(OrchestratorError::ZeroIterationBound);
    }
    let original = &inst.cost_matrix;
    let mut c = Controller::new(Pipeline::TapLegacy, &inst.id, backends);
    let answer = (|| {
        let mut current = reduce(&mut c, original)?;
        loop {
            if c.trace.iterations >= bound {
                c.trace.termination = Termination::IterationBound;
                return Err(Halt);
            }
            c.trace.iterations += 1;
            let cover = c.call(AgentRequest::CoverSeeker(MatrixRequest::new(&current)), None, |r| {
                match r {
                    AgentResponse::CoverSeeker(p) => {
                        cover_in_bounds(&p, n)?;
                        Ok(p)
                    }
                    _ => unreachable!(),
                }
            })?;
            if cover.collum_collection.len() + cover.row_collection.len() == n {
                let matching = find_matching(&mut c, &current)?;
                return report(&mut c, original, matching);
            }
            current = normalize_step(&mut c, &current, cover)?;
        }
    })();
    Ok(c.finish(answer))
}

/// Dispatches to the pipeline's controller. `max_iters` is ignored for the
/// knapsack loop, which always runs once per item.
pub fn run_pipeline(
    pipeline: Pipeline,
    instance: &crate::problem::Instance,
    backends: &BackendAssignment,
    max_iters: Option<u64>,
) -> Result<RunTrace, PipelineMismatch> {
    use crate::problem::Instance;
    let out = match (pipeline, instance) {
        (Pipeline::Ksp, Instance::Knapsack(k)) => run_ksp_pipeline(k, backends),
        (Pipeline::Tap, Instance::Assignment(a)) => run_tap_pipeline(a, backends, max_iters),
        (Pipeline::TapLegacy, Instance::Assignment(a)) => {
            run_tap_pipeline_legacy(a, backends, max_iters)
        }
        _ => return Err(PipelineMismatch::WrongProblem(pipeline)),
    };
    out.map_err(PipelineMismatch::Orchestrator)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineMismatch {
    #[error("pipeline `{0}` cannot run this problem type")]
    WrongProblem(Pipeline),
    #[error(transparent)]
    Orchestrator(#[from] OrchestratorError),
}
