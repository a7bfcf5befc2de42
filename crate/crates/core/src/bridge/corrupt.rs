use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::requirement::satisfies;
use crate::agents::wire::*;
use crate::agents::{AgentRequest, AgentResponse, Role};
use crate::problem::FeasibleState;

/// Shape of a wrong answer. Each strategy that cannot apply to a response
/// (or happens to produce a correct one) falls back to the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Corruption {
    /// Role default: most valuable overweight pair for the Trimmer, off-by-one for the
    /// Worker, reporters and matrix roles, swapped indices for the
    /// Matcher, Painter and Cover Seeker.
    #[default]
    Auto,
    DropOne,
    /// A random overweight pair survives trimming.
    KeepOneOverweight,
    /// The overweight pair with the highest value survives, the one a later
    /// maximum will pick up.
    KeepBestOverweight,
    OffByOne,
    SwapTwoIndices,
}

impl Corruption {
    fn resolve(self, role: Role) -> Corruption {
        if self != Corruption::Auto {
            return self;
        }
        match role {
            Role::Trimmer => Corruption::KeepBestOverweight,
            Role::Matcher | Role::Painter | Role::CoverSeeker => Corruption::SwapTwoIndices,
            _ => Corruption::OffByOne,
        }
    }
}

enum Step {
    Strategy(Corruption),
    Spurious,
}

/// Returns a schema-valid response that fails `request`'s requirement.
pub(crate) fn corrupt(
    strategy: Corruption,
    request: &AgentRequest,
    reference: &AgentResponse,
    rng: &mut impl Rng,
) -> AgentResponse {
    let chain = [
        Step::Strategy(strategy.resolve(request.role())),
        Step::Strategy(Corruption::DropOne),
        Step::Strategy(Corruption::OffByOne),
        Step::Spurious,
    ];
    let mut last = None;
    for step in chain {
        let candidate = match step {
            Step::Strategy(s) => apply(s, request, reference, rng),
            Step::Spurious => Some(spurious(reference)),
        };
        if let Some(c) = candidate {
            if !satisfies(request, &c) {
                return c;
            }
            last = Some(c);
        }
    }
    last.expect("spurious step always yields a candidate")
}

fn pick(rng: &mut impl Rng, len: usize) -> usize {
    rng.random_range(0..len)
}

fn drop_one<T>(v: &mut Vec<T>, rng: &mut impl Rng) -> bool {
    if v.is_empty() {
        return false;
    }
    let i = pick(rng, v.len());
    v.remove(i);
    true
}

fn bump_state(v: &mut [FeasibleState], rng: &mut impl Rng) -> bool {
    if v.is_empty() {
        return false;
    }
    let i = pick(rng, v.len());
    v[i].value = v[i].value.wrapping_add(1);
    true
}

fn bump_matrix(m: &mut WireMatrix, rng: &mut impl Rng) -> bool {
    let n = m.len();
    if n == 0 || m[0].is_empty() {
        return false;
    }
    let (i, j) = (pick(rng, n), pick(rng, m[0].len()));
    m[i][j] = m[i][j].wrapping_add(1);
    true
}

fn apply(
    s: Corruption,
    request: &AgentRequest,
    reference: &AgentResponse,
    rng: &mut impl Rng,
) -> Option<AgentResponse> {
    use Corruption::*;
    let mut out = reference.clone();
    let size = request.difficulty() as usize;
    let changed = match (&mut out, s) {
        (AgentResponse::Worker(r), DropOne) => drop_one(&mut r.n_list, rng),
        (AgentResponse::Worker(r), OffByOne) => bump_state(&mut r.n_list, rng),
        (AgentResponse::Trimmer(r), DropOne) => drop_one(&mut r.t_list, rng),
        (AgentResponse::Trimmer(r), OffByOne) => bump_state(&mut r.t_list, rng),
        (AgentResponse::Trimmer(r), KeepOneOverweight | KeepBestOverweight) => {
            let AgentRequest::Trimmer(req) = request else { return None };
            let heavy: Vec<_> = req.n_list.iter().filter(|s| s.weight > req.capacity).collect();
            if heavy.is_empty() {
                false
            } else {
                let kept = if s == KeepBestOverweight {
                    // ties go to the lighter pair
                    **heavy.iter().max_by_key(|h| (h.value, std::cmp::Reverse(h.weight))).unwrap()
                } else {
                    *heavy[pick(rng, heavy.len())]
                };
                r.t_list.push(kept);
                true
            }
        }
        (AgentResponse::KspReporter(r), OffByOne) => {
            r.max_value = r.max_value.wrapping_add(1);
            true
        }
        (AgentResponse::TapReporter(r), OffByOne) => {
            r.total_value = r.total_value.wrapping_add(1);
            true
        }
        (
            AgentResponse::RowReducer(ReducedMatrixResponse { reduced_matrix: m })
            | AgentResponse::ColReducer(ReducedMatrixResponse { reduced_matrix: m })
            | AgentResponse::Normalizer(NormalizerResponse { normalized_matrix: m }),
            OffByOne,
        ) => bump_matrix(m, rng),
        (AgentResponse::Matcher(r), DropOne) => drop_one(&mut r.largest_collection, rng),
        (AgentResponse::Matcher(r), OffByOne) => {
            let cells = &mut r.largest_collection;
            if cells.is_empty() || size < 2 {
                false
            } else {
                let i = pick(rng, cells.len());
                cells[i][1] = (cells[i][1] + 1) % size;
                true
            }
        }
        (AgentResponse::Matcher(r), SwapTwoIndices) => {
            let cells = &mut r.largest_collection;
            if cells.len() < 2 {
                false
            } else {
                let i = pick(rng, cells.len());
                let j = (i + 1 + pick(rng, cells.len() - 1)) % cells.len();
                let c = cells[i][1];
                cells[i][1] = cells[j][1];
                cells[j][1] = c;
                true
            }
        }
        (AgentResponse::Painter(r) | AgentResponse::CoverSeeker(r), DropOne) => {
            let total = r.row_collection.len() + r.collum_collection.len();
            if total == 0 {
                false
            } else {
                let i = pick(rng, total);
                if i < r.row_collection.len() {
                    r.row_collection.remove(i);
                } else {
                    r.collum_collection.remove(i - r.row_collection.len());
                }
                true
            }
        }
        (AgentResponse::Painter(r) | AgentResponse::CoverSeeker(r), OffByOne) => {
            let total = r.row_collection.len() + r.collum_collection.len();
            if total == 0 || size < 2 {
                false
            } else {
                let i = pick(rng, total);
                let slot = if i < r.row_collection.len() {
                    &mut r.row_collection[i]
                } else {
                    &mut r.collum_collection[i - r.row_collection.len()]
                };
                *slot = (*slot + 1) % size;
                true
            }
        }
        (AgentResponse::Painter(r) | AgentResponse::CoverSeeker(r), SwapTwoIndices) => {
            // a row line becomes the column with the same index, or back
            let total = r.row_collection.len() + r.collum_collection.len();
            if total == 0 {
                false
            } else {
                let i = pick(rng, total);
                if i < r.row_collection.len() {
                    let k = r.row_collection.remove(i);
                    r.collum_collection.push(k);
                } else {
                    let k = r.collum_collection.remove(i - r.row_collection.len());
                    r.row_collection.push(k);
                }
                true
            }
        }
        _ => false,
    };
    changed.then_some(out)
}

/// Last resort: a repeated element, or one element where none belongs.
fn spurious(reference: &AgentResponse) -> AgentResponse {
    let mut out = reference.clone();
    fn dup_or<T: Clone>(v: &mut Vec<T>, fresh: T) {
        let extra = v.first().cloned().unwrap_or(fresh);
        v.push(extra);
    }
    match &mut out {
        AgentResponse::Worker(r) => dup_or(&mut r.n_list, FeasibleState::EMPTY),
        AgentResponse::Trimmer(r) => dup_or(&mut r.t_list, FeasibleState::EMPTY),
        AgentResponse::KspReporter(r) => r.max_value = r.max_value.wrapping_add(1),
        AgentResponse::TapReporter(r) => r.total_value = r.total_value.wrapping_add(1),
        AgentResponse::RowReducer(ReducedMatrixResponse { reduced_matrix: m })
        | AgentResponse::ColReducer(ReducedMatrixResponse { reduced_matrix: m })
        | AgentResponse::Normalizer(NormalizerResponse { normalized_matrix: m }) => {
            if let Some(x) = m.first_mut().and_then(|row| row.first_mut()) {
                *x = x.wrapping_add(1);
            } else {
                m.push(vec![0]);
            }
        }
        AgentResponse::Matcher(r) => dup_or(&mut r.largest_collection, [0, 0]),
        AgentResponse::Painter(r) | AgentResponse::CoverSeeker(r) => {
            dup_or(&mut r.row_collection, 0);
        }
    }
    out
}
