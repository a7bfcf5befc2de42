//! Deterministic reference implementations of every leaf task.
//!
//! These functions define each role's contract. [`respond`] runs them behind
//! the wire envelopes, and [`requirement::satisfies`] decides whether an
//! arbitrary response to a request is correct.

mod hungarian;
mod knapsack;
pub mod requirement;
pub mod wire;

pub use hungarian::{
    col_reduce, cover_seek, match_zeros, normalize, paint_cover, row_reduce, tap_report,
};
pub use knapsack::{ksp_report, trimmer_filter, worker_expand};
pub use wire::{AgentRequest, AgentResponse, Role};

use thiserror::Error;

use crate::problem::{Matrix, ProblemError, StateSet};
use wire::*;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error("invalid input: {0}")]
    Problem(#[from] ProblemError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("arithmetic overflow")]
    Overflow,
    #[error("matching of size {matching} is not maximum (König cover has {cover} lines)")]
    NotMaximum { matching: usize, cover: usize },
    #[error("matching uses a non-zero cell")]
    MatchingOffZeros,
    #[error("collection has {found} cells, expected {expected}")]
    WrongCardinality { expected: usize, found: usize },
}

/// Runs the reference agent for `request`'s role.
pub fn respond(request: &AgentRequest) -> Result<AgentResponse, AgentError> {
    Ok(match request {
        AgentRequest::Worker(r) => {
            let c_list: StateSet = r.c_list.iter().copied().collect();
            let out = worker_expand(&c_list, r.s_item)?;
            AgentResponse::Worker(WorkerResponse {
                n_list: out.to_vec(),
            })
        }
        AgentRequest::Trimmer(r) => AgentResponse::Trimmer(TrimmerResponse {
            t_list: trimmer_filter(r.n_list.iter().copied(), r.capacity).to_vec(),
        }),
        AgentRequest::KspReporter(r) => AgentResponse::KspReporter(KspReportResponse {
            max_value: ksp_report(&r.c_list.iter().copied().collect()),
        }),
        AgentRequest::RowReducer(r) => AgentResponse::RowReducer(ReducedMatrixResponse {
            reduced_matrix: row_reduce(&square(&r.matrix)?).to_rows(),
        }),
        AgentRequest::ColReducer(r) => AgentResponse::ColReducer(ReducedMatrixResponse {
            reduced_matrix: col_reduce(&square(&r.matrix)?).to_rows(),
        }),
        AgentRequest::Matcher(r) => AgentResponse::Matcher(MatcherResponse {
            largest_collection: cells_of(&match_zeros(&square(&r.matrix)?)),
        }),
        AgentRequest::Painter(r) => {
            let m = square(&r.matrix)?;
            let matching = matching_from_cells(&r.collection, m.size())?;
            AgentResponse::Painter(cover_response(&paint_cover(&m, &matching)?))
        }
        AgentRequest::Normalizer(r) => {
            let m = square(&r.matrix)?;
            let cover = r.cover();
            if !cover.in_bounds(m.size()) {
                return Err(AgentError::InvalidInput("cover index out of bounds".into()));
            }
            AgentResponse::Normalizer(NormalizerResponse {
                normalized_matrix: normalize(&m, &cover).to_rows(),
            })
        }
        AgentRequest::TapReporter(r) => {
            let m = square(&r.matrix)?;
            let matching = matching_from_cells(&r.collection, m.size())?;
            AgentResponse::TapReporter(TapReportResponse {
                total_value: tap_report(&m, &matching)?,
            })
        }
        AgentRequest::CoverSeeker(r) => {
            AgentResponse::CoverSeeker(cover_response(&cover_seek(&square(&r.matrix)?)))
        }
    })
}

fn square(rows: &WireMatrix) -> Result<Matrix, AgentError> {
    Ok(Matrix::from_rows(rows.clone())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn respond_dispatches_by_role() {
        let req = AgentRequest::from_payload(
            Role::Worker,
            json!({"c_list": [[2, 5]], "s_item": [3, 4]}),
        )
        .unwrap();
        let resp = respond(&req).unwrap();
        assert_eq!(resp.payload(), json!({"n_list": [[5, 9]]}));
    }

    #[test]
    fn negative_item_rejected_at_the_wire() {
        let err = AgentRequest::from_payload(
            Role::Worker,
            json!({"c_list": [[2, 5]], "s_item": [-3, 4]}),
        );
        assert!(err.is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        let err = AgentRequest::from_payload(
            Role::Trimmer,
            json!({"n_list": [], "capacity": 3, "note": "x"}),
        );
        assert!(err.is_err());
    }

    #[test]
    fn non_square_matrix_is_an_agent_error() {
        let req = AgentRequest::ColReducer(MatrixRequest {
            matrix: vec![vec![5], vec![2]],
        });
        assert!(matches!(
            respond(&req),
            Err(AgentError::Problem(ProblemError::NotSquare { .. }))
        ));
    }
}
