use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ProblemError;

/// Largest matrix size accepted by [`brute_force_assignment`].
pub const MAX_BRUTE_FORCE_ASSIGNMENT: usize = 9;

/// Square matrix of non-negative integers, stored row-major. Serialized as a
/// nested list `[[int, ...], ...]`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u64>>", into = "Vec<Vec<u64>>")]
pub struct Matrix {
    size: usize,
    data: Vec<u64>,
}

impl Matrix {
    /// Builds a matrix from rows, rejecting empty or non-square input.
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self, ProblemError> {
        let size = rows.len();
        if size == 0 {
            return Err(ProblemError::ZeroSize);
        }
        let mut data = Vec::with_capacity(size * size);
        for (row, entries) in rows.into_iter().enumerate() {
            if entries.len() != size {
                return Err(ProblemError::NotSquare {
                    row,
                    len: entries.len(),
                    expected: size,
                });
            }
            data.extend(entries);
        }
        Ok(Self { size, data })
    }

    pub fn filled(size: usize, value: u64) -> Result<Self, ProblemError> {
        if size == 0 {
            return Err(ProblemError::ZeroSize);
        }
        Ok(Self {
            size,
            data: vec![value; size * size],
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: usize, column: usize) -> u64 {
        self.data[row * self.size + column]
    }

    pub fn set(&mut self, row: usize, column: usize, value: u64) {
        self.data[row * self.size + column] = value;
    }

    pub fn row(&self, row: usize) -> &[u64] {
        &self.data[row * self.size..(row + 1) * self.size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> + '_ {
        self.data.chunks(self.size)
    }

    pub fn is_zero(&self, row: usize, column: usize) -> bool {
        self.get(row, column) == 0
    }

    /// Positions of zero entries in row-major order.
    pub fn zeros(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.size;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 0)
            .map(move |(k, _)| (k / n, k % n))
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.rows().map(<[u64]>::to_vec).collect()
    }

    pub fn sum(&self) -> u128 {
        self.data.iter().map(|&v| v as u128).sum()
    }
}

impl TryFrom<Vec<Vec<u64>>> for Matrix {
    type Error = ProblemError;

    fn try_from(rows: Vec<Vec<u64>>) -> Result<Self, Self::Error> {
        Matrix::from_rows(rows)
    }
}

impl From<Matrix> for Vec<Vec<u64>> {
    fn from(m: Matrix) -> Self {
        m.to_rows()
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

/// A task-assignment instance. On the wire: `{"id": str, "cost_matrix": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentInstance {
    pub id: String,
    pub cost_matrix: Matrix,
}

impl AssignmentInstance {
    pub fn new(id: impl Into<String>, cost_matrix: Matrix) -> Self {
        Self {
            id: id.into(),
            cost_matrix,
        }
    }

    pub fn from_rows(id: impl Into<String>, rows: Vec<Vec<u64>>) -> Result<Self, ProblemError> {
        Ok(Self::new(id, Matrix::from_rows(rows)?))
    }

    pub fn size(&self) -> usize {
        self.cost_matrix.size()
    }
}

/// A set of `(row, column)` cells, no two sharing a row or a column.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Matching(BTreeSet<(usize, usize)>);

impl Matching {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates disjointness and bounds against an `size × size` matrix.
    pub fn new(
        pairs: impl IntoIterator<Item = (usize, usize)>,
        size: usize,
    ) -> Result<Self, ProblemError> {
        let mut rows = vec![false; size];
        let mut cols = vec![false; size];
        let mut set = BTreeSet::new();
        for (row, column) in pairs {
            if row >= size || column >= size {
                return Err(ProblemError::OutOfBounds { row, column, size });
            }
            if std::mem::replace(&mut rows[row], true) {
                return Err(ProblemError::RepeatedRow(row));
            }
            if std::mem::replace(&mut cols[column], true) {
                return Err(ProblemError::RepeatedColumn(column));
            }
            set.insert((row, column));
        }
        Ok(Self(set))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, row: usize, column: usize) -> bool {
        self.0.contains(&(row, column))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<(usize, usize)> {
        self.pairs().collect()
    }

    /// True when every cell of the matching is a zero of `m`.
    pub fn on_zeros_of(&self, m: &Matrix) -> bool {
        self.pairs().all(|(r, c)| m.is_zero(r, c))
    }
}

/// Rows and columns chosen to cover zero entries of a matrix.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LineCover {
    pub rows: BTreeSet<usize>,
    pub columns: BTreeSet<usize>,
}

impl LineCover {
    pub fn new(
        rows: impl IntoIterator<Item = usize>,
        columns: impl IntoIterator<Item = usize>,
    ) -> Self {
        Self {
            rows: rows.into_iter().collect(),
            columns: columns.into_iter().collect(),
        }
    }

    /// Cover size `L = |rows| + |columns|`.
    pub fn len(&self) -> usize {
        self.rows.len() + self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty() && self.columns.is_empty()
    }

    pub fn covers(&self, row: usize, column: usize) -> bool {
        self.rows.contains(&row) || self.columns.contains(&column)
    }

    pub fn in_bounds(&self, size: usize) -> bool {
        self.rows.iter().chain(&self.columns).all(|&i| i < size)
    }

    pub fn covers_all_zeros(&self, m: &Matrix) -> bool {
        m.zeros().all(|(r, c)| self.covers(r, c))
    }
}

/// Minimum-cost assignment via the shortest-augmenting-path Hungarian method
/// with row and column potentials, O(N³).
///
/// Returns the optimal cost and a perfect matching `{(i, σ(i))}` attaining it.
pub fn solve_assignment_exact(inst: &AssignmentInstance) -> (u64, Matching) {
    let m = &inst.cost_matrix;
    let n = m.size();
    let cost = |i: usize, j: usize| m.get(i - 1, j - 1) as i128;
    // 1-based with a sentinel column 0, as in the classical formulation.
    let mut u = vec![0i128; n + 1];
    let mut v = vec![0i128; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![i128::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = i128::MAX;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let pairs = (1..=n).map(|j| (owner[j] - 1, j - 1));
    let matching = Matching::new(pairs, n).expect("hungarian output is a permutation");
    let total = matching.pairs().map(|(r, c)| m.get(r, c)).sum();
    (total, matching)
}

/// Minimum over all `N!` permutations of `Σ C[i][σ(i)]`.
pub fn brute_force_assignment(inst: &AssignmentInstance) -> Result<u64, ProblemError> {
    let m = &inst.cost_matrix;
    let n = m.size();
    if n > MAX_BRUTE_FORCE_ASSIGNMENT {
        return Err(ProblemError::TooLarge {
            size: n,
            limit: MAX_BRUTE_FORCE_ASSIGNMENT,
        });
    }

    fn search(m: &Matrix, row: usize, used: u32, partial: u64, best: &mut u64) {
        let n = m.size();
        if row == n {
            *best = (*best).min(partial);
            return;
        }
        for col in 0..n {
            if used & (1 << col) == 0 {
                search(m, row + 1, used | (1 << col), partial + m.get(row, col), best);
            }
        }
    }

    let mut best = u64::MAX;
    search(m, 0, 0, 0, &mut best);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked() -> AssignmentInstance {
        AssignmentInstance::from_rows("w", vec![vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]])
            .unwrap()
    }

    #[test]
    fn worked_three_by_three() {
        // Enumerated by hand over all six permutations: 4+0+2, 4+5+2, 1+2+2,
        // 1+5+3, 3+2+2, 3+0+3 -> minimum 5 at (0,1),(1,0),(2,2).
        let inst = worked();
        let (z, m) = solve_assignment_exact(&inst);
        assert_eq!(z, 5);
        assert_eq!(m.to_vec(), vec![(0, 1), (1, 0), (2, 2)]);
        assert_eq!(brute_force_assignment(&inst).unwrap(), 5);
    }

    #[test]
    fn small_closed_forms() {
        let inst = AssignmentInstance::from_rows("i", vec![vec![0, 9], vec![9, 0]]).unwrap();
        assert_eq!(solve_assignment_exact(&inst).0, 0);
        let inst = AssignmentInstance::from_rows("one", vec![vec![7]]).unwrap();
        assert_eq!(solve_assignment_exact(&inst).0, 7);
        assert_eq!(brute_force_assignment(&inst).unwrap(), 7);
        for (a, b, c, d) in [(1, 2, 3, 4), (5, 1, 1, 5), (9, 9, 0, 3)] {
            let inst =
                AssignmentInstance::from_rows("2", vec![vec![a, b], vec![c, d]]).unwrap();
            assert_eq!(brute_force_assignment(&inst).unwrap(), (a + d).min(b + c));
            assert_eq!(solve_assignment_exact(&inst).0, (a + d).min(b + c));
        }
    }

    #[test]
    fn constant_matrix() {
        for n in 1..=6 {
            let inst = AssignmentInstance::new("c", Matrix::filled(n, 4).unwrap());
            let (z, m) = solve_assignment_exact(&inst);
            assert_eq!(z, 4 * n as u64);
            assert_eq!(m.len(), n);
        }
    }

    #[test]
    fn matrix_shape_errors() {
        assert_eq!(
            Matrix::from_rows(vec![vec![5], vec![2]]),
            Err(ProblemError::NotSquare { row: 0, len: 1, expected: 2 })
        );
        assert_eq!(Matrix::from_rows(vec![]), Err(ProblemError::ZeroSize));
        assert!(serde_json::from_str::<Matrix>("[[1,2],[3]]").is_err());
    }

    #[test]
    fn matching_invariants() {
        assert_eq!(
            Matching::new([(0, 0), (0, 1)], 2),
            Err(ProblemError::RepeatedRow(0))
        );
        assert_eq!(
            Matching::new([(0, 1), (1, 1)], 2),
            Err(ProblemError::RepeatedColumn(1))
        );
        assert!(matches!(
            Matching::new([(2, 0)], 2),
            Err(ProblemError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn brute_force_guard() {
        let inst = AssignmentInstance::new("big", Matrix::filled(10, 1).unwrap());
        assert!(matches!(
            brute_force_assignment(&inst),
            Err(ProblemError::TooLarge { size: 10, limit: 9 })
        ));
    }

    #[test]
    fn wire_format() {
        let json = serde_json::to_string(&worked()).unwrap();
        assert_eq!(json, r#"{"id":"w","cost_matrix":[[4,1,3],[2,0,5],[3,2,2]]}"#);
    }
}
