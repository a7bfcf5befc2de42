use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BackendPlan, EvalError};
use crate::orchestrator::{run_pipeline, Pipeline, RunTrace, Termination};
use crate::problem::{
    generate_assignment, generate_knapsack, AssignmentGenConfig, Instance, KnapsackGenConfig,
};
use crate::seed::mix;

/// One scored run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub size: usize,
    pub expected: u64,
    pub correct: bool,
    pub trace: RunTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    pub size: usize,
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub mean_iterations: f64,
    /// Run count per termination reason.
    pub terminations: BTreeMap<Termination, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    pub pipeline: Pipeline,
    pub sizes: Vec<SizeReport>,
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
}

impl SystemReport {
    pub fn from_outcomes(pipeline: Pipeline, outcomes: &[RunOutcome]) -> Self {
        let mut by_size: BTreeMap<usize, Vec<&RunOutcome>> = BTreeMap::new();
        for o in outcomes {
            by_size.entry(o.size).or_default().push(o);
        }
        let sizes = by_size
            .into_iter()
            .map(|(size, runs)| {
                let n = runs.len();
                let correct = runs.iter().filter(|o| o.correct).count();
                let mut terminations = BTreeMap::new();
                for o in &runs {
                    *terminations.entry(o.trace.termination).or_insert(0) += 1;
                }
                SizeReport {
                    size,
                    n,
                    correct,
                    accuracy: correct as f64 / n as f64,
                    mean_iterations: runs.iter().map(|o| o.trace.iterations as f64).sum::<f64>()
                        / n as f64,
                    terminations,
                }
            })
            .collect();
        let n = outcomes.len();
        let correct = outcomes.iter().filter(|o| o.correct).count();
        Self {
            pipeline,
            sizes,
            n,
            correct,
            accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
        }
    }

    pub fn size(&self, size: usize) -> Option<&SizeReport> {
        self.sizes.iter().find(|s| s.size == size)
    }

    /// `size,n,correct,accuracy` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("size,n,correct,accuracy\n");
        for s in &self.sizes {
            let _ = writeln!(out, "{},{},{},{:.6}", s.size, s.n, s.correct, s.accuracy);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Seeded instances for `pipeline`'s problem, `per_size` of each size, in
/// size order.
pub fn generate_batch(
    pipeline: Pipeline,
    sizes: &[usize],
    per_size: usize,
    seed: u64,
) -> Result<Vec<Instance>, EvalError> {
    let mut out = Vec::with_capacity(sizes.len() * per_size);
    for &n in sizes {
        for i in 0..per_size {
            let s = mix(mix(seed, n as u64), i as u64);
            out.push(if pipeline.is_knapsack() {
                generate_knapsack(n, s, &KnapsackGenConfig::default())?.into()
            } else {
                generate_assignment(n, s, &AssignmentGenConfig::default())?.into()
            });
        }
    }
    Ok(out)
}

/// Runs every instance with fresh backends from `plan` (in parallel on the
/// current rayon pool) and scores it against the exact optimum. Run `i`
/// draws its error-model stream from `(seed, i)`, so results do not depend
/// on scheduling.
pub fn evaluate_instances(
    pipeline: Pipeline,
    plan: &BackendPlan,
    instances: &[Instance],
    seed: u64,
    max_iters: Option<u64>,
) -> Result<Vec<RunOutcome>, EvalError> {
    plan.validate(pipeline)?;
    instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let backends = plan.assignment(pipeline, mix(seed, i as u64))?;
            let trace = run_pipeline(pipeline, inst, &backends, max_iters)?;
            let expected = inst.exact_optimum()?;
            Ok(RunOutcome {
                size: inst.size(),
                expected,
                correct: trace.final_answer == Some(expected),
                trace,
            })
        })
        .collect()
}

/// Generates `per_size` instances per size, runs and scores them.
pub fn evaluate_system(
    pipeline: Pipeline,
    plan: &BackendPlan,
    sizes: &[usize],
    per_size: usize,
    seed: u64,
) -> Result<SystemReport, EvalError> {
    if sizes.is_empty() {
        return Err(EvalError::NoSizes);
    }
    let batch = generate_batch(pipeline, sizes, per_size, seed)?;
    let outcomes = evaluate_instances(pipeline, plan, &batch, seed, None)?;
    Ok(SystemReport::from_outcomes(pipeline, &outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::Role;
    use crate::bridge::{BackendConfig, Band, Corruption, ErrorModelConfig};

    #[test]
    fn reference_systems_are_exact() {
        let r = evaluate_system(Pipeline::Ksp, &BackendPlan::reference(Pipeline::Ksp), &[3, 4, 5], 20, 1).unwrap();
        assert!(r.sizes.iter().all(|s| s.accuracy == 1.0 && s.n == 20));
        assert_eq!(r.size(4).unwrap().mean_iterations, 4.0);
        assert_eq!(r.to_csv().lines().next(), Some("size,n,correct,accuracy"));
        assert_eq!(r.to_csv().lines().nth(1), Some("3,20,20,1.000000"));
        let t = evaluate_system(Pipeline::Tap, &BackendPlan::reference(Pipeline::Tap), &[6, 7], 10, 2).unwrap();
        assert_eq!(t.accuracy, 1.0);
        assert_eq!(t.sizes[0].terminations[&Termination::Completed], 10);
    }

    #[test]
    fn missing_role_and_empty_sizes() {
        let plan = BackendPlan::new().with(Role::Worker, BackendConfig::Reference);
        assert!(matches!(
            evaluate_system(Pipeline::Ksp, &plan, &[3], 1, 0),
            Err(EvalError::MissingRole(Role::Trimmer))
        ));
        assert!(matches!(
            evaluate_system(Pipeline::Ksp, &BackendPlan::reference(Pipeline::Ksp), &[], 1, 0),
            Err(EvalError::NoSizes)
        ));
    }

    #[test]
    fn deterministic_and_lossy_under_errors() {
        let em = ErrorModelConfig::new(
            vec![Band::new(1, 8, 0.54), Band::new(9, 16, 0.24), Band::open(17, 0.05)],
            Corruption::Auto,
            9,
        );
        let plan = BackendPlan::reference(Pipeline::Ksp).with(Role::Trimmer, BackendConfig::ErrorModel(em));
        let a = evaluate_system(Pipeline::Ksp, &plan, &[3, 6], 40, 4).unwrap();
        let b = evaluate_system(Pipeline::Ksp, &plan, &[3, 6], 40, 4).unwrap();
        assert_eq!(a, b);
        assert!(a.accuracy < 1.0);
    }
}
