//! Leaf steps of the line-cover formulation of the Hungarian method.

use crate::problem::{LineCover, Matching, Matrix};

use super::AgentError;

/// Subtracts each row's minimum from that row.
pub fn row_reduce(m: &Matrix) -> Matrix {
    let mut out = m.clone();
    for r in 0..m.size() {
        let min = *m.row(r).iter().min().expect("square matrices are non-empty");
        for c in 0..m.size() {
            out.set(r, c, m.get(r, c) - min);
        }
    }
    out
}

/// Subtracts each column's minimum from that column.
pub fn col_reduce(m: &Matrix) -> Matrix {
    let n = m.size();
    let mut out = m.clone();
    for c in 0..n {
        let min = (0..n).map(|r| m.get(r, c)).min().expect("non-empty");
        for r in 0..n {
            out.set(r, c, m.get(r, c) - min);
        }
    }
    out
}

/// Maximum set of independent zeros, found by augmenting paths (Kuhn).
///
/// Rows are processed in ascending order and each search tries columns in
/// ascending order, so the result is deterministic.
pub fn match_zeros(m: &Matrix) -> Matching {
    let n = m.size();
    let mut owner: Vec<Option<usize>> = vec![None; n];

    fn augment(
        m: &Matrix,
        row: usize,
        visited: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for col in 0..m.size() {
            if !m.is_zero(row, col) || visited[col] {
                continue;
            }
            visited[col] = true;
            let free = match owner[col] {
                None => true,
                Some(other) => augment(m, other, visited, owner),
            };
            if free {
                owner[col] = Some(row);
                return true;
            }
        }
        false
    }

    for row in 0..n {
        let mut visited = vec![false; n];
        augment(m, row, &mut visited, &mut owner);
    }
    let pairs = owner
        .iter()
        .enumerate()
        .filter_map(|(col, row)| row.map(|r| (r, col)));
    Matching::new(pairs, n).expect("augmenting paths keep rows and columns distinct")
}

/// Minimum line cover built from a maximum matching (König construction).
///
/// Starting from unmatched rows, alternate along zero edges to columns and
/// along matching edges back to rows. The cover is the unreached rows plus
/// the reached columns; its size equals `|matching|` exactly when the
/// matching is maximum.
pub fn paint_cover(m: &Matrix, matching: &Matching) -> Result<LineCover, AgentError> {
    let n = m.size();
    if matching.pairs().any(|(r, c)| r >= n || c >= n) {
        return Err(AgentError::InvalidInput("matching index out of bounds".into()));
    }
    if !matching.on_zeros_of(m) {
        return Err(AgentError::MatchingOffZeros);
    }
    let mut row_match = vec![None; n];
    let mut col_match = vec![None; n];
    for (r, c) in matching.pairs() {
        row_match[r] = Some(c);
        col_match[c] = Some(r);
    }
    let mut row_seen = vec![false; n];
    let mut col_seen = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&r| row_match[r].is_none()).collect();
    for &r in &stack {
        row_seen[r] = true;
    }
    while let Some(r) = stack.pop() {
        for c in 0..n {
            if m.is_zero(r, c) && !col_seen[c] {
                col_seen[c] = true;
                if let Some(next) = col_match[c] {
                    if !row_seen[next] {
                        row_seen[next] = true;
                        stack.push(next);
                    }
                }
            }
        }
    }
    let cover = LineCover::new(
        (0..n).filter(|&r| !row_seen[r]),
        (0..n).filter(|&c| col_seen[c]),
    );
    if cover.len() != matching.len() {
        return Err(AgentError::NotMaximum {
            matching: matching.len(),
            cover: cover.len(),
        });
    }
    Ok(cover)
}

/// Creates new zeros outside the cover: subtract the smallest uncovered
/// entry from every uncovered entry and add it to every doubly covered one.
/// Returns the input unchanged when nothing is uncovered or the smallest
/// uncovered entry is already zero.
pub fn normalize(m: &Matrix, cover: &LineCover) -> Matrix {
    let n = m.size();
    let uncovered_min = (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .filter(|&(r, c)| !cover.covers(r, c))
        .map(|(r, c)| m.get(r, c))
        .min();
    let delta = match uncovered_min {
        None | Some(0) => return m.clone(),
        Some(d) => d,
    };
    let mut out = m.clone();
    for r in 0..n {
        for c in 0..n {
            let by_row = cover.rows.contains(&r);
            let by_col = cover.columns.contains(&c);
            match (by_row, by_col) {
                (false, false) => out.set(r, c, m.get(r, c) - delta),
                (true, true) => out.set(r, c, m.get(r, c) + delta),
                _ => {}
            }
        }
    }
    out
}

/// Sums the original costs at the collected cells; requires a full matching.
pub fn tap_report(original: &Matrix, collection: &Matching) -> Result<u64, AgentError> {
    let n = original.size();
    if collection.len() != n {
        return Err(AgentError::WrongCardinality {
            expected: n,
            found: collection.len(),
        });
    }
    collection
        .pairs()
        .map(|(r, c)| {
            if r >= n || c >= n {
                Err(AgentError::InvalidInput(format!(
                    "cell ({r}, {c}) outside a {n}x{n} matrix"
                )))
            } else {
                Ok(original.get(r, c))
            }
        })
        .try_fold(0u64, |acc, v| acc.checked_add(v?).ok_or(AgentError::Overflow))
}

/// Minimum line cover computed directly from the matrix.
pub fn cover_seek(m: &Matrix) -> LineCover {
    paint_cover(m, &match_zeros(m)).expect("a maximum matching always yields a König cover")
}
