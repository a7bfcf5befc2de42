//! Per-role request and response envelopes.
//!
//! Field names are fixed by the prompts the agents are given, including the
//! two historical spellings `collum_collection` (Painter / Cover Seeker output)
//! and `collumn_collection` (Normalizer input). Unknown fields are rejected.

use std::fmt;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::problem::{FeasibleState, Item, LineCover, Matching, Matrix, ProblemError};

/// Every leaf-task role across the knapsack and assignment blueprints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Worker,
    Trimmer,
    KspReporter,
    RowReducer,
    ColReducer,
    Matcher,
    Painter,
    Normalizer,
    TapReporter,
    CoverSeeker,
}

impl Role {
    pub const ALL: [Role; 10] = [
        Role::Worker,
        Role::Trimmer,
        Role::KspReporter,
        Role::RowReducer,
        Role::ColReducer,
        Role::Matcher,
        Role::Painter,
        Role::Normalizer,
        Role::TapReporter,
        Role::CoverSeeker,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Role::Worker => "worker",
            Role::Trimmer => "trimmer",
            Role::KspReporter => "ksp_reporter",
            Role::RowReducer => "row_reducer",
            Role::ColReducer => "col_reducer",
            Role::Matcher => "matcher",
            Role::Painter => "painter",
            Role::Normalizer => "normalizer",
            Role::TapReporter => "tap_reporter",
            Role::CoverSeeker => "cover_seeker",
        }
    }

    /// Knapsack roles measure difficulty by state-set size, assignment roles
    /// by matrix size.
    pub fn is_knapsack(self) -> bool {
        matches!(self, Role::Worker | Role::Trimmer | Role::KspReporter)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown role `{0}`")]
pub struct UnknownRole(pub String);

impl FromStr for Role {
    type Err = UnknownRole;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Role::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| UnknownRole(s.to_string()))
    }
}

/// Raw nested-list matrix as it appears on the wire; may be non-square.
pub type WireMatrix = Vec<Vec<u64>>;
/// `[row_index, column_index]`.
pub type WireCell = [usize; 2];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkerRequest {
    pub c_list: Vec<FeasibleState>,
    pub s_item: Item,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkerResponse {
    pub n_list: Vec<FeasibleState>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrimmerRequest {
    pub n_list: Vec<FeasibleState>,
    pub capacity: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrimmerResponse {
    pub t_list: Vec<FeasibleState>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KspReportRequest {
    pub c_list: Vec<FeasibleState>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KspReportResponse {
    pub max_value: u64,
}

/// `{"matrix": ...}`, the input of both reducers, the Matcher and the Cover Seeker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixRequest {
    pub matrix: WireMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedMatrixResponse {
    pub reduced_matrix: WireMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatcherResponse {
    pub largest_collection: Vec<WireCell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PainterRequest {
    pub matrix: WireMatrix,
    pub collection: Vec<WireCell>,
}

/// Painter and Cover Seeker output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverResponse {
    pub collum_collection: Vec<usize>,
    pub row_collection: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizerRequest {
    pub matrix: WireMatrix,
    pub collumn_collection: Vec<usize>,
    pub row_collection: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizerResponse {
    pub normalized_matrix: WireMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TapReportRequest {
    pub matrix: WireMatrix,
    pub collection: Vec<WireCell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TapReportResponse {
    pub total_value: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum PayloadError {
    #[error("payload for {role} does not match its schema: {source}")]
    Schema {
        role: Role,
        #[source]
        source: serde_json::Error,
    },
}

fn decode<T: DeserializeOwned>(role: Role, payload: Value) -> Result<T, PayloadError> {
    serde_json::from_value(payload).map_err(|source| PayloadError::Schema { role, source })
}

fn encode<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("wire envelopes always serialize")
}

/// A typed request addressed to one role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AgentRequest {
    Worker(WorkerRequest),
    Trimmer(TrimmerRequest),
    KspReporter(KspReportRequest),
    RowReducer(MatrixRequest),
    ColReducer(MatrixRequest),
    Matcher(MatrixRequest),
    Painter(PainterRequest),
    Normalizer(NormalizerRequest),
    TapReporter(TapReportRequest),
    CoverSeeker(MatrixRequest),
}

impl AgentRequest {
    pub fn role(&self) -> Role {
        match self {
            AgentRequest::Worker(_) => Role::Worker,
            AgentRequest::Trimmer(_) => Role::Trimmer,
            AgentRequest::KspReporter(_) => Role::KspReporter,
            AgentRequest::RowReducer(_) => Role::RowReducer,
            AgentRequest::ColReducer(_) => Role::ColReducer,
            AgentRequest::Matcher(_) => Role::Matcher,
            AgentRequest::Painter(_) => Role::Painter,
            AgentRequest::Normalizer(_) => Role::Normalizer,
            AgentRequest::TapReporter(_) => Role::TapReporter,
            AgentRequest::CoverSeeker(_) => Role::CoverSeeker,
        }
    }

    /// The bare JSON payload (no role tag), exactly as sent to an agent.
    pub fn payload(&self) -> Value {
        match self {
            AgentRequest::Worker(r) => encode(r),
            AgentRequest::Trimmer(r) => encode(r),
            AgentRequest::KspReporter(r) => encode(r),
            AgentRequest::RowReducer(r)
            | AgentRequest::ColReducer(r)
            | AgentRequest::Matcher(r)
            | AgentRequest::CoverSeeker(r) => encode(r),
            AgentRequest::Painter(r) => encode(r),
            AgentRequest::Normalizer(r) => encode(r),
            AgentRequest::TapReporter(r) => encode(r),
        }
    }

    pub fn from_payload(role: Role, payload: Value) -> Result<Self, PayloadError> {
        Ok(match role {
            Role::Worker => AgentRequest::Worker(decode(role, payload)?),
            Role::Trimmer => AgentRequest::Trimmer(decode(role, payload)?),
            Role::KspReporter => AgentRequest::KspReporter(decode(role, payload)?),
            Role::RowReducer => AgentRequest::RowReducer(decode(role, payload)?),
            Role::ColReducer => AgentRequest::ColReducer(decode(role, payload)?),
            Role::Matcher => AgentRequest::Matcher(decode(role, payload)?),
            Role::Painter => AgentRequest::Painter(decode(role, payload)?),
            Role::Normalizer => AgentRequest::Normalizer(decode(role, payload)?),
            Role::TapReporter => AgentRequest::TapReporter(decode(role, payload)?),
            Role::CoverSeeker => AgentRequest::CoverSeeker(decode(role, payload)?),
        })
    }

    /// Difficulty used for band lookup: state-list length for knapsack
    /// roles, number of matrix rows for assignment roles.
    pub fn difficulty(&self) -> u64 {
        let n = match self {
            AgentRequest::Worker(r) => r.c_list.len(),
            AgentRequest::Trimmer(r) => r.n_list.len(),
            AgentRequest::KspReporter(r) => r.c_list.len(),
            AgentRequest::RowReducer(r)
            | AgentRequest::ColReducer(r)
            | AgentRequest::Matcher(r)
            | AgentRequest::CoverSeeker(r) => r.matrix.len(),
            AgentRequest::Painter(r) => r.matrix.len(),
            AgentRequest::Normalizer(r) => r.matrix.len(),
            AgentRequest::TapReporter(r) => r.matrix.len(),
        };
        n as u64
    }
}

/// A typed response from one role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AgentResponse {
    Worker(WorkerResponse),
    Trimmer(TrimmerResponse),
    KspReporter(KspReportResponse),
    RowReducer(ReducedMatrixResponse),
    ColReducer(ReducedMatrixResponse),
    Matcher(MatcherResponse),
    Painter(CoverResponse),
    Normalizer(NormalizerResponse),
    TapReporter(TapReportResponse),
    CoverSeeker(CoverResponse),
}

impl AgentResponse {
    pub fn role(&self) -> Role {
        match self {
            AgentResponse::Worker(_) => Role::Worker,
            AgentResponse::Trimmer(_) => Role::Trimmer,
            AgentResponse::KspReporter(_) => Role::KspReporter,
            AgentResponse::RowReducer(_) => Role::RowReducer,
            AgentResponse::ColReducer(_) => Role::ColReducer,
            AgentResponse::Matcher(_) => Role::Matcher,
            AgentResponse::Painter(_) => Role::Painter,
            AgentResponse::Normalizer(_) => Role::Normalizer,
            AgentResponse::TapReporter(_) => Role::TapReporter,
            AgentResponse::CoverSeeker(_) => Role::CoverSeeker,
        }
    }

    pub fn payload(&self) -> Value {
        match self {
            AgentResponse::Worker(r) => encode(r),
            AgentResponse::Trimmer(r) => encode(r),
            AgentResponse::KspReporter(r) => encode(r),
            AgentResponse::RowReducer(r) | AgentResponse::ColReducer(r) => encode(r),
            AgentResponse::Matcher(r) => encode(r),
            AgentResponse::Painter(r) | AgentResponse::CoverSeeker(r) => encode(r),
            AgentResponse::Normalizer(r) => encode(r),
            AgentResponse::TapReporter(r) => encode(r),
        }
    }

    pub fn from_payload(role: Role, payload: Value) -> Result<Self, PayloadError> {
        Ok(match role {
            Role::Worker => AgentResponse::Worker(decode(role, payload)?),
            Role::Trimmer => AgentResponse::Trimmer(decode(role, payload)?),
            Role::KspReporter => AgentResponse::KspReporter(decode(role, payload)?),
            Role::RowReducer => AgentResponse::RowReducer(decode(role, payload)?),
            Role::ColReducer => AgentResponse::ColReducer(decode(role, payload)?),
            Role::Matcher => AgentResponse::Matcher(decode(role, payload)?),
            Role::Painter => AgentResponse::Painter(decode(role, payload)?),
            Role::Normalizer => AgentResponse::Normalizer(decode(role, payload)?),
            Role::TapReporter => AgentResponse::TapReporter(decode(role, payload)?),
            Role::CoverSeeker => AgentResponse::CoverSeeker(decode(role, payload)?),
        })
    }
}

pub fn cells_of(m: &Matching) -> Vec<WireCell> {
    m.pairs().map(|(r, c)| [r, c]).collect()
}

pub fn matching_from_cells(cells: &[WireCell], size: usize) -> Result<Matching, ProblemError> {
    Matching::new(cells.iter().map(|&[r, c]| (r, c)), size)
}

pub fn cover_response(cover: &LineCover) -> CoverResponse {
    CoverResponse {
        collum_collection: cover.columns.iter().copied().collect(),
        row_collection: cover.rows.iter().copied().collect(),
    }
}

impl CoverResponse {
    pub fn to_cover(&self) -> LineCover {
        LineCover::new(
            self.row_collection.iter().copied(),
            self.collum_collection.iter().copied(),
        )
    }
}

impl NormalizerRequest {
    pub fn new(matrix: &Matrix, cover: &LineCover) -> Self {
        Self {
            matrix: matrix.to_rows(),
            collumn_collection: cover.columns.iter().copied().collect(),
            row_collection: cover.rows.iter().copied().collect(),
        }
    }

    pub fn cover(&self) -> LineCover {
        LineCover::new(
            self.row_collection.iter().copied(),
            self.collumn_collection.iter().copied(),
        )
    }
}

impl MatrixRequest {
    pub fn new(matrix: &Matrix) -> Self {
        Self {
            matrix: matrix.to_rows(),
        }
    }
}
