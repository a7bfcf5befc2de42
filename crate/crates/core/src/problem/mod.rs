//! Problem instances, seeded generators and exact ground-truth solvers.
//!
//! Two problem families are supported: 0/1 knapsack (maximize value under a
//! weight capacity) and square task assignment (minimize total cost over all
//! permutations). Each family has a fast exact solver and an exhaustive
//! enumeration oracle used to cross-check it on small instances.

mod assignment;
mod generate;
mod knapsack;

pub use assignment::{
    brute_force_assignment, solve_assignment_exact, AssignmentInstance, LineCover, Matching,
    Matrix, MAX_BRUTE_FORCE_ASSIGNMENT,
};
pub use generate::{
    generate_assignment, generate_knapsack, AssignmentGenConfig, IntRange, KnapsackGenConfig,
};
pub use knapsack::{
    brute_force_knapsack, solve_knapsack_exact, FeasibleState, Item, KnapsackInstance, StateSet,
    MAX_BRUTE_FORCE_ITEMS,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("knapsack instance has no items")]
    NoItems,
    #[error("problem size must be at least 1")]
    ZeroSize,
    #[error("empty integer range [{lo}, {hi}]")]
    EmptyRange { lo: u64, hi: u64 },
    #[error("capacity ratio must be finite and non-negative, got {0}")]
    InvalidRatio(f64),
    #[error("instance of size {size} exceeds the enumeration limit of {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("index ({row}, {column}) out of bounds for a {size}x{size} matrix")]
    OutOfBounds { row: usize, column: usize, size: usize },
    #[error("row {0} appears twice in the matching")]
    RepeatedRow(usize),
    #[error("column {0} appears twice in the matching")]
    RepeatedColumn(usize),
    #[error("arithmetic overflow")]
    Overflow,
}

/// Either problem family, for code that handles both.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
pub enum Instance {
    Knapsack(KnapsackInstance),
    Assignment(AssignmentInstance),
}

impl Instance {
    pub fn id(&self) -> &str {
        match self {
            Instance::Knapsack(k) => &k.id,
            Instance::Assignment(a) => &a.id,
        }
    }

    /// Item count or matrix dimension.
    pub fn size(&self) -> usize {
        match self {
            Instance::Knapsack(k) => k.size(),
            Instance::Assignment(a) => a.size(),
        }
    }

    /// Ground-truth optimum: maximum value or minimum cost.
    pub fn exact_optimum(&self) -> Result<u64, ProblemError> {
        match self {
            Instance::Knapsack(k) => solve_knapsack_exact(k),
            Instance::Assignment(a) => Ok(solve_assignment_exact(a).0),
        }
    }
}

impl From<KnapsackInstance> for Instance {
    fn from(k: KnapsackInstance) -> Self {
        Instance::Knapsack(k)
    }
}

impl From<AssignmentInstance> for Instance {
    fn from(a: AssignmentInstance) -> Self {
        Instance::Assignment(a)
    }
}
