use crate::problem::{FeasibleState, Item, StateSet};

use super::AgentError;

/// Worker: `{(w + w_k, v + v_k) for (w, v) in c_list}`.
pub fn worker_expand(c_list: &StateSet, s_item: Item) -> Result<StateSet, AgentError> {
    c_list
        .iter()
        .map(|s| s.checked_add(s_item).ok_or(AgentError::Overflow))
        .collect()
}

/// Trimmer: keep states with `weight <= capacity`, one copy each.
pub fn trimmer_filter(
    n_list: impl IntoIterator<Item = FeasibleState>,
    capacity: u64,
) -> StateSet {
    n_list.into_iter().filter(|s| s.weight <= capacity).collect()
}

/// Reporter: the largest value component, 0 for an empty set.
pub fn ksp_report(c_list: &StateSet) -> u64 {
    c_list.max_value().unwrap_or(0)
}
