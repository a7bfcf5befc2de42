use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ProblemError;

/// Largest item count accepted by [`brute_force_knapsack`].
pub const MAX_BRUTE_FORCE_ITEMS: usize = 25;

/// A knapsack item, serialized as `[weight, value]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[u64; 2]", into = "[u64; 2]")]
pub struct Item {
    pub weight: u64,
    pub value: u64,
}

impl Item {
    pub fn new(weight: u64, value: u64) -> Self {
        Self { weight, value }
    }
}

impl From<[u64; 2]> for Item {
    fn from([weight, value]: [u64; 2]) -> Self {
        Self { weight, value }
    }
}

impl From<Item> for [u64; 2] {
    fn from(item: Item) -> Self {
        [item.weight, item.value]
    }
}

/// Accumulated `(weight, value)` of a partial selection, serialized as a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[u64; 2]", into = "[u64; 2]")]
pub struct FeasibleState {
    pub weight: u64,
    pub value: u64,
}

impl FeasibleState {
    pub const EMPTY: FeasibleState = FeasibleState { weight: 0, value: 0 };

    pub fn new(weight: u64, value: u64) -> Self {
        Self { weight, value }
    }

    /// Adds an item to this state, failing on overflow.
    pub fn checked_add(self, item: Item) -> Option<FeasibleState> {
        Some(FeasibleState {
            weight: self.weight.checked_add(item.weight)?,
            value: self.value.checked_add(item.value)?,
        })
    }
}

impl From<[u64; 2]> for FeasibleState {
    fn from([weight, value]: [u64; 2]) -> Self {
        Self { weight, value }
    }
}

impl From<FeasibleState> for [u64; 2] {
    fn from(s: FeasibleState) -> Self {
        [s.weight, s.value]
    }
}

/// A set of feasible states. Duplicates collapse on insertion; iteration is
/// in ascending `(weight, value)` order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateSet(BTreeSet<FeasibleState>);

impl StateSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// The initial set `{(0, 0)}`.
    pub fn initial() -> Self {
        std::iter::once(FeasibleState::EMPTY).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn insert(&mut self, state: FeasibleState) -> bool {
        self.0.insert(state)
    }

    pub fn contains(&self, state: &FeasibleState) -> bool {
        self.0.contains(state)
    }

    pub fn iter(&self) -> impl Iterator<Item = &FeasibleState> + '_ {
        self.0.iter()
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        StateSet(self.0.union(&other.0).copied().collect())
    }

    pub fn max_value(&self) -> Option<u64> {
        self.0.iter().map(|s| s.value).max()
    }

    pub fn to_vec(&self) -> Vec<FeasibleState> {
        self.0.iter().copied().collect()
    }
}

impl FromIterator<FeasibleState> for StateSet {
    fn from_iter<T: IntoIterator<Item = FeasibleState>>(iter: T) -> Self {
        StateSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a StateSet {
    type Item = &'a FeasibleState;
    type IntoIter = std::collections::btree_set::Iter<'a, FeasibleState>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl IntoIterator for StateSet {
    type Item = FeasibleState;
    type IntoIter = std::collections::btree_set::IntoIter<FeasibleState>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

#[derive(Deserialize)]
struct RawKnapsack {
    id: String,
    items: Vec<Item>,
    capacity: u64,
}

/// A 0/1 knapsack instance. On the wire:
/// `{"id": str, "items": [[w, v], ...], "capacity": int}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawKnapsack")]
pub struct KnapsackInstance {
    pub id: String,
    items: Vec<Item>,
    capacity: u64,
}

impl TryFrom<RawKnapsack> for KnapsackInstance {
    type Error = ProblemError;

    fn try_from(raw: RawKnapsack) -> Result<Self, Self::Error> {
        KnapsackInstance::new(raw.id, raw.items, raw.capacity)
    }
}

impl KnapsackInstance {
    pub fn new(
        id: impl Into<String>,
        items: Vec<Item>,
        capacity: u64,
    ) -> Result<Self, ProblemError> {
        if items.is_empty() {
            return Err(ProblemError::NoItems);
        }
        Ok(Self {
            id: id.into(),
            items,
            capacity,
        })
    }

    /// Convenience constructor from `(weight, value)` tuples.
    pub fn from_pairs(
        id: impl Into<String>,
        pairs: &[(u64, u64)],
        capacity: u64,
    ) -> Result<Self, ProblemError> {
        let items = pairs.iter().map(|&(w, v)| Item::new(w, v)).collect();
        Self::new(id, items, capacity)
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    /// Number of items, N.
    pub fn size(&self) -> usize {
        self.items.len()
    }
}

/// Exact optimum via the feasible-state recursion
/// `S_k = S_{k-1} ∪ {(w + w_k, v + v_k) | (w, v) ∈ S_{k-1}, w + w_k ≤ W}`,
/// starting from `S_0 = {(0, 0)}`. No dominance pruning is applied.
pub fn solve_knapsack_exact(inst: &KnapsackInstance) -> Result<u64, ProblemError> {
    let capacity = inst.capacity();
    let mut states = StateSet::initial();
    for &item in inst.items() {
        let mut next = states.clone();
        for state in &states {
            let added = state.checked_add(item).ok_or(ProblemError::Overflow)?;
            if added.weight <= capacity {
                next.insert(added);
            }
        }
        states = next;
    }
    Ok(states.max_value().unwrap_or(0))
}

/// Exhaustive enumeration of all `2^N` subsets, visited in Gray-code order so
/// each step toggles exactly one item.
pub fn brute_force_knapsack(inst: &KnapsackInstance) -> Result<u64, ProblemError> {
    let n = inst.size();
    if n > MAX_BRUTE_FORCE_ITEMS {
        return Err(ProblemError::TooLarge {
            size: n,
            limit: MAX_BRUTE_FORCE_ITEMS,
        });
    }
    let items = inst.items();
    let capacity = inst.capacity() as u128;
    let (mut weight, mut value) = (0u128, 0u128);
    let mut best = 0u128;
    let mut prev_gray = 0u64;
    for k in 1u64..(1u64 << n) {
        let gray = k ^ (k >> 1);
        let bit = (gray ^ prev_gray).trailing_zeros() as usize;
        let item = items[bit];
        if gray & (1 << bit) != 0 {
            weight += item.weight as u128;
            value += item.value as u128;
        } else {
            weight -= item.weight as u128;
            value -= item.value as u128;
        }
        if weight <= capacity && value > best {
            best = value;
        }
        prev_gray = gray;
    }
    u64::try_from(best).map_err(|_| ProblemError::Overflow)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(pairs: &[(u64, u64)], capacity: u64) -> KnapsackInstance {
        KnapsackInstance::from_pairs("t", pairs, capacity).unwrap()
    }

    #[test]
    fn nothing_fits() {
        let k = inst(&[(2, 3)], 1);
        assert_eq!(solve_knapsack_exact(&k).unwrap(), 0);
        assert_eq!(brute_force_knapsack(&k).unwrap(), 0);
    }

    #[test]
    fn small_worked_instances() {
        // Hand enumeration: subsets of {(1,1),(2,2),(3,3)} under W=3 reach 3.
        let k = inst(&[(1, 1), (2, 2), (3, 3)], 3);
        assert_eq!(solve_knapsack_exact(&k).unwrap(), 3);
        assert_eq!(brute_force_knapsack(&k).unwrap(), 3);
        // Both items together weigh exactly 5.
        let k = inst(&[(3, 4), (2, 5)], 5);
        assert_eq!(solve_knapsack_exact(&k).unwrap(), 9);
        assert_eq!(brute_force_knapsack(&k).unwrap(), 9);
    }

    #[test]
    fn zero_capacity_and_single_item() {
        let k = inst(&[(1, 5), (2, 7), (4, 1)], 0);
        assert_eq!(brute_force_knapsack(&k).unwrap(), 0);
        let k = inst(&[(1, 10)], 1);
        assert_eq!(brute_force_knapsack(&k).unwrap(), 10);
    }

    #[test]
    fn zero_weight_item_fits_empty_knapsack() {
        let k = inst(&[(0, 6), (3, 9)], 0);
        assert_eq!(solve_knapsack_exact(&k).unwrap(), 6);
        assert_eq!(brute_force_knapsack(&k).unwrap(), 6);
    }

    #[test]
    fn enumeration_guard() {
        let k = KnapsackInstance::new("big", vec![Item::new(1, 1); 26], 3).unwrap();
        assert_eq!(
            brute_force_knapsack(&k),
            Err(ProblemError::TooLarge { size: 26, limit: 25 })
        );
    }

    #[test]
    fn empty_items_rejected() {
        assert_eq!(
            KnapsackInstance::new("e", vec![], 4),
            Err(ProblemError::NoItems)
        );
        let err = serde_json::from_str::<KnapsackInstance>(r#"{"id":"e","items":[],"capacity":1}"#);
        assert!(err.is_err());
    }

    #[test]
    fn wire_format() {
        let k = inst(&[(3, 4), (2, 5)], 5);
        let json = serde_json::to_string(&k).unwrap();
        assert_eq!(json, r#"{"id":"t","items":[[3,4],[2,5]],"capacity":5}"#);
        let back: KnapsackInstance = serde_json::from_str(&json).unwrap();
        assert_eq!(back, k);
        assert!(serde_json::from_str::<KnapsackInstance>(
            r#"{"id":"n","items":[[-1,4]],"capacity":5}"#
        )
        .is_err());
    }

    #[test]
    fn state_set_dedups_on_deserialize() {
        let s: StateSet = serde_json::from_str("[[5,9],[5,9],[2,1]]").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(serde_json::to_string(&s).unwrap(), "[[2,1],[5,9]]");
    }
}
