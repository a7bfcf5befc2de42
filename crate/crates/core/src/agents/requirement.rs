//! Correctness relations: which responses are acceptable for a request.
//!
//! Most roles have exactly one correct answer (compared order-insensitively
//! where the payload is a collection). The Matcher accepts any maximum set of
//! independent zeros and the Painter / Cover Seeker accept any minimum line
//! cover.

use crate::problem::{FeasibleState, Matrix};

use super::wire::*;
use super::{match_zeros, respond};

fn sorted(list: &[FeasibleState]) -> Vec<FeasibleState> {
    let mut v = list.to_vec();
    v.sort_unstable();
    v
}

/// True when `response` is a correct answer to `request`. Role mismatches
/// and requests the reference agent rejects are never satisfied.
pub fn satisfies(request: &AgentRequest, response: &AgentResponse) -> bool {
    if request.role() != response.role() {
        return false;
    }
    match (request, response) {
        (AgentRequest::Matcher(req), AgentResponse::Matcher(resp)) => {
            let Ok(m) = Matrix::from_rows(req.matrix.clone()) else {
                return false;
            };
            match matching_from_cells(&resp.largest_collection, m.size()) {
                Ok(found) => found.on_zeros_of(&m) && found.len() == match_zeros(&m).len(),
                Err(_) => false,
            }
        }
        (AgentRequest::Painter(PainterRequest { matrix, .. }), AgentResponse::Painter(resp))
        | (AgentRequest::CoverSeeker(MatrixRequest { matrix }), AgentResponse::CoverSeeker(resp)) => {
            let Ok(m) = Matrix::from_rows(matrix.clone()) else {
                return false;
            };
            let cover = resp.to_cover();
            // repeated indices inflate the reported size
            let reported = resp.collum_collection.len() + resp.row_collection.len();
            reported == cover.len()
                && cover.in_bounds(m.size())
                && cover.covers_all_zeros(&m)
                && cover.len() == match_zeros(&m).len()
        }
        _ => {
            let Ok(expected) = respond(request) else {
                return false;
            };
            canonical_eq(&expected, response)
        }
    }
}

/// Equality up to ordering of list-valued fields. Repeated entries are kept,
/// so a response that duplicates a state is not equal to one that does not.
pub fn canonical_eq(a: &AgentResponse, b: &AgentResponse) -> bool {
    match (a, b) {
        (AgentResponse::Worker(x), AgentResponse::Worker(y)) => {
            sorted(&x.n_list) == sorted(&y.n_list)
        }
        (AgentResponse::Trimmer(x), AgentResponse::Trimmer(y)) => {
            sorted(&x.t_list) == sorted(&y.t_list)
        }
        (AgentResponse::Matcher(x), AgentResponse::Matcher(y)) => {
            let mut p = x.largest_collection.clone();
            let mut q = y.largest_collection.clone();
            p.sort_unstable();
            q.sort_unstable();
            p == q
        }
        (AgentResponse::Painter(x), AgentResponse::Painter(y))
        | (AgentResponse::CoverSeeker(x), AgentResponse::CoverSeeker(y)) => {
            let norm = |v: &[usize]| {
                let mut v = v.to_vec();
                v.sort_unstable();
                v
            };
            norm(&x.collum_collection) == norm(&y.collum_collection)
                && norm(&x.row_collection) == norm(&y.row_collection)
        }
        _ => a == b,
    }
}
