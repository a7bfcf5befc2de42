use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AssignmentInstance, Item, KnapsackInstance, Matrix, ProblemError};

/// Closed integer interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub lo: u64,
    pub hi: u64,
}

impl IntRange {
    pub fn new(lo: u64, hi: u64) -> Result<Self, ProblemError> {
        let r = Self { lo, hi };
        r.check()?;
        Ok(r)
    }

    fn check(&self) -> Result<(), ProblemError> {
        if self.lo > self.hi {
            return Err(ProblemError::EmptyRange {
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(())
    }

    fn sample(&self, rng: &mut impl Rng) -> u64 {
        rng.random_range(self.lo..=self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnapsackGenConfig {
    pub weight_range: IntRange,
    pub value_range: IntRange,
    /// Capacity is `round(capacity_ratio × Σ weights)`.
    pub capacity_ratio: f64,
}

impl Default for KnapsackGenConfig {
    fn default() -> Self {
        Self {
            weight_range: IntRange { lo: 1, hi: 30 },
            value_range: IntRange { lo: 1, hi: 30 },
            capacity_ratio: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentGenConfig {
    pub cost_range: IntRange,
}

impl Default for AssignmentGenConfig {
    fn default() -> Self {
        Self {
            cost_range: IntRange { lo: 1, hi: 30 },
        }
    }
}

/// Seeded knapsack instance with uniform weights and values.
pub fn generate_knapsack(
    n: usize,
    seed: u64,
    cfg: &KnapsackGenConfig,
) -> Result<KnapsackInstance, ProblemError> {
    if n == 0 {
        return Err(ProblemError::ZeroSize);
    }
    cfg.weight_range.check()?;
    cfg.value_range.check()?;
    if !cfg.capacity_ratio.is_finite() || cfg.capacity_ratio < 0.0 {
        return Err(ProblemError::InvalidRatio(cfg.capacity_ratio));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let items: Vec<Item> = (0..n)
        .map(|_| {
            let weight = cfg.weight_range.sample(&mut rng);
            let value = cfg.value_range.sample(&mut rng);
            Item::new(weight, value)
        })
        .collect();
    let total: f64 = items.iter().map(|i| i.weight as f64).sum();
    let capacity = (cfg.capacity_ratio * total).round() as u64;
    KnapsackInstance::new(format!("ksp-n{n}-s{seed}"), items, capacity)
}

/// Seeded `n × n` cost matrix with entries uniform in the cost range.
pub fn generate_assignment(
    n: usize,
    seed: u64,
    cfg: &AssignmentGenConfig,
) -> Result<AssignmentInstance, ProblemError> {
    if n == 0 {
        return Err(ProblemError::ZeroSize);
    }
    cfg.cost_range.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| (0..n).map(|_| cfg.cost_range.sample(&mut rng)).collect())
        .collect();
    Ok(AssignmentInstance::new(
        format!("tap-n{n}-s{seed}"),
        Matrix::from_rows(rows)?,
    ))
}
