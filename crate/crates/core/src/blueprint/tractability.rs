use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Blueprint, BlueprintError};

/// Measured accuracy of one backend on one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TractabilityMark {
    pub task_id: String,
    pub backend_id: String,
    pub measured_accuracy: f64,
    pub sample_count: u64,
}

impl TractabilityMark {
    pub fn new(
        task_id: impl Into<String>,
        backend_id: impl Into<String>,
        measured_accuracy: f64,
        sample_count: u64,
    ) -> Result<Self, BlueprintError> {
        if !(0.0..=1.0).contains(&measured_accuracy) {
            return Err(BlueprintError::InvalidAccuracy(measured_accuracy));
        }
        if sample_count == 0 {
            return Err(BlueprintError::NoSamples);
        }
        Ok(Self {
            task_id: task_id.into(),
            backend_id: backend_id.into(),
            measured_accuracy,
            sample_count,
        })
    }
}

/// Which tasks of a blueprint are currently known to be tractable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TractabilityTable {
    flags: BTreeMap<String, bool>,
    marks: BTreeMap<String, TractabilityMark>,
}

impl TractabilityTable {
    /// Every task starts out not tractable.
    pub fn new(b: &Blueprint) -> Self {
        Self {
            flags: b.tasks().iter().map(|t| (t.id.clone(), false)).collect(),
            marks: BTreeMap::new(),
        }
    }

    /// Records `mark` and flags its task tractable iff the measured accuracy
    /// reaches `threshold`. Returns the new flag.
    pub fn mark(&mut self, mark: TractabilityMark, threshold: f64) -> Result<bool, BlueprintError> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(BlueprintError::InvalidThreshold(threshold));
        }
        let flag = self
            .flags
            .get_mut(&mark.task_id)
            .ok_or_else(|| BlueprintError::UnknownTask(mark.task_id.clone()))?;
        *flag = mark.measured_accuracy >= threshold;
        let result = *flag;
        self.marks.insert(mark.task_id.clone(), mark);
        Ok(result)
    }

    /// Value-semantics variant of [`TractabilityTable::mark`].
    pub fn marked(&self, mark: TractabilityMark, threshold: f64) -> Result<Self, BlueprintError> {
        let mut next = self.clone();
        next.mark(mark, threshold)?;
        Ok(next)
    }

    pub fn is_tractable(&self, task_id: &str) -> Option<bool> {
        self.flags.get(task_id).copied()
    }

    pub fn last_mark(&self, task_id: &str) -> Option<&TractabilityMark> {
        self.marks.get(task_id)
    }

    /// True once every task is flagged tractable.
    pub fn is_terminal(&self) -> bool {
        self.flags.values().all(|&f| f)
    }

    pub fn pending(&self) -> impl Iterator<Item = &str> {
        self.flags.iter().filter(|(_, &f)| !f).map(|(k, _)| k.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blueprint::catalog;

    fn mark(task: &str, acc: f64) -> TractabilityMark {
        TractabilityMark::new(task, "model", acc, 200).unwrap()
    }

    #[test]
    fn threshold_decides() {
        let b = catalog::ksp_blueprint();
        let mut t = TractabilityTable::new(&b);
        assert!(t.mark(mark("worker", 0.97), 0.9).unwrap());
        assert!(!t.mark(mark("ksp_reporter", 0.84), 0.9).unwrap());
        // the trimmer's accuracy on its largest band
        assert!(!t.mark(mark("trimmer", 0.05), 0.9).unwrap());
        assert!(!t.is_terminal());
        assert_eq!(t.pending().collect::<Vec<_>>(), ["ksp_reporter", "trimmer"]);
        t.mark(mark("ksp_reporter", 1.0), 0.9).unwrap();
        t.mark(mark("trimmer", 0.9), 0.9).unwrap();
        assert!(t.is_terminal());
    }

    #[test]
    fn errors() {
        let b = catalog::ksp_blueprint();
        let t = TractabilityTable::new(&b);
        assert!(matches!(t.marked(mark("sorter", 1.0), 0.9), Err(BlueprintError::UnknownTask(_))));
        assert!(TractabilityMark::new("worker", "m", 1.2, 1).is_err());
        assert!(TractabilityMark::new("worker", "m", 0.5, 0).is_err());
        assert!(t.marked(mark("worker", 0.5), 1.5).is_err());
        assert_eq!(t.is_tractable("worker"), Some(false));
    }
}
