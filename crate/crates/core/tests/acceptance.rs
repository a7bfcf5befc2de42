//! End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
//! test fails if any line is FAIL.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::Value;

use ktr_core::agents::{match_zeros, paint_cover, respond, AgentRequest, Role};
use ktr_core::bridge::prompts::system_prompt;
use ktr_core::bridge::{BackendConfig, Band, Corruption, ErrorModelBackend, ErrorModelConfig};
use ktr_core::eval::{
    evaluate_system, generate_batch, profile_agent, specialization_advantage, BackendPlan,
    DifficultyRange, NflScenario,
};
use ktr_core::orchestrator::{
    run_ksp_pipeline, run_tap_pipeline, run_tap_pipeline_legacy, BackendAssignment, Pipeline,
    Termination,
};
use ktr_core::problem::{
    brute_force_assignment, brute_force_knapsack, solve_assignment_exact, AssignmentInstance,
    Instance, Matrix,
};

/// Writes past the test harness's capture so the report shows up in plain
/// `cargo test` output.
fn report(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

const KSP_SIZES: [usize; 6] = [3, 4, 5, 6, 7, 8];
const TAP_SIZES: std::ops::RangeInclusive<usize> = 3..=15;
const PUBLISHED_TRIMMER: [f64; 4] = [0.54, 0.24, 0.07, 0.05];

fn ksp_oracle() -> Outcome {
    let start = Instant::now();
    let batch = generate_batch(Pipeline::Ksp, &KSP_SIZES, 500, 101).unwrap();
    let refs = BackendAssignment::reference(Pipeline::Ksp);
    let mismatches = batch
        .par_iter()
        .filter(|inst| {
            let Instance::Knapsack(k) = inst else { unreachable!() };
            let t = run_ksp_pipeline(k, &refs).unwrap();
            t.termination != Termination::Completed
                || t.final_answer != Some(brute_force_knapsack(k).unwrap())
        })
        .count();
    let took = start.elapsed();
    outcome(
        mismatches == 0 && took < Duration::from_secs(60),
        format!("{} instances, {mismatches} mismatches vs brute force, {:.1}s", batch.len(), took.as_secs_f64()),
    )
}

struct TapRun {
    size: usize,
    exact_ok: bool,
    brute_ok: bool,
    iterations: [u64; 2],
    completed: bool,
}

fn tap_runs() -> (Vec<TapRun>, Duration) {
    let start = Instant::now();
    let sizes: Vec<usize> = TAP_SIZES.collect();
    let batch = generate_batch(Pipeline::Tap, &sizes, 200, 202).unwrap();
    let refs = BackendAssignment::reference(Pipeline::Tap);
    let legacy_refs = BackendAssignment::reference(Pipeline::TapLegacy);
    let runs = batch
        .par_iter()
        .map(|inst| {
            let Instance::Assignment(a) = inst else { unreachable!() };
            let (exact, _) = solve_assignment_exact(a);
            let new = run_tap_pipeline(a, &refs, None).unwrap();
            let old = run_tap_pipeline_legacy(a, &legacy_refs, None).unwrap();
            let answers = [new.final_answer, old.final_answer];
            let brute_ok = a.size() > 8
                || answers.iter().all(|&x| x == Some(brute_force_assignment(a).unwrap()));
            TapRun {
                size: a.size(),
                exact_ok: answers.iter().all(|&x| x == Some(exact)),
                brute_ok,
                iterations: [new.iterations, old.iterations],
                completed: new.is_completed() && old.is_completed(),
            }
        })
        .collect();
    (runs, start.elapsed())
}

fn tap_oracle(runs: &[TapRun], took: Duration) -> Outcome {
    let exact_bad = runs.iter().filter(|r| !r.exact_ok).count();
    let brute_bad = runs.iter().filter(|r| !r.brute_ok).count();
    outcome(
        exact_bad == 0 && brute_bad == 0 && took < Duration::from_secs(120),
        format!(
            "{} instances x 2 pipelines, {exact_bad} exact-solver mismatches, {brute_bad} brute-force mismatches (N <= 8), {:.1}s",
            runs.len(),
            took.as_secs_f64()
        ),
    )
}

fn tap_termination(runs: &[TapRun]) -> Outcome {
    let mut per_size: BTreeMap<usize, (u64, u64, usize)> = BTreeMap::new();
    let mut over = 0;
    for r in runs {
        let bound = (r.size * r.size) as u64;
        if !r.completed || r.iterations.iter().any(|&i| i > bound) {
            over += 1;
        }
        let e = per_size.entry(r.size).or_default();
        e.0 = e.0.max(r.iterations[0]);
        e.1 = e.1.max(r.iterations[1]);
        e.2 += 1;
    }
    for (n, (a, b, count)) in &per_size {
        report(&format!("    iterations N={n:>2}: max {a} (tap), {b} (legacy), bound {}, runs {count}", n * n));
    }
    outcome(over == 0, format!("{over} runs exceeded N^2 iterations or did not complete"))
}

fn konig() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut bad = 0;
    for _ in 0..1000 {
        let n = rng.random_range(2..=15);
        let density: f64 = rng.random_range(0.05..=0.6);
        let rows = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| if rng.random_bool(density) { 0 } else { rng.random_range(1..=30) })
                    .collect()
            })
            .collect();
        let m = Matrix::from_rows(rows).unwrap();
        let matching = match_zeros(&m);
        let ok = matching.on_zeros_of(&m)
            && paint_cover(&m, &matching)
                .is_ok_and(|c| c.len() == matching.len() && c.covers_all_zeros(&m));
        if !ok {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("1000 matrices, {bad} with cover size != matching size or an uncovered zero"))
}

fn golden_chain() -> Outcome {
    let inst = AssignmentInstance::from_rows("worked", vec![vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]]).unwrap();
    let t = run_tap_pipeline(&inst, &BackendAssignment::reference(Pipeline::Tap), None).unwrap();
    let want = [
        ("row_reducer", r#"{"reduced_matrix":[[3,0,2],[2,0,5],[1,0,0]]}"#),
        ("col_reducer", r#"{"reduced_matrix":[[2,0,2],[1,0,5],[0,0,0]]}"#),
        ("matcher", r#"{"largest_collection":[[0,1],[2,0]]}"#),
        ("painter", r#"{"collum_collection":[1],"row_collection":[2]}"#),
        ("normalizer", r#"{"normalized_matrix":[[1,0,1],[0,0,4],[0,1,0]]}"#),
        ("matcher", r#"{"largest_collection":[[0,1],[1,0],[2,2]]}"#),
        ("tap_reporter", r#"{"total_value":5}"#),
    ];
    let got: Vec<(String, String)> = t
        .steps
        .iter()
        .map(|s| (s.role.to_string(), serde_json::to_string(s.response.as_ref().unwrap()).unwrap()))
        .collect();
    let matches = got.len() == want.len()
        && got.iter().zip(&want).all(|((r, p), (wr, wp))| r == wr && p == wp);
    let legacy = run_tap_pipeline_legacy(&inst, &BackendAssignment::reference(Pipeline::TapLegacy), None)
        .unwrap()
        .final_answer;
    outcome(
        matches && t.final_answer == Some(5) && legacy == Some(5),
        format!("{} steps, chain {}, answer {:?}", got.len(), if matches { "identical" } else { "differs" }, t.final_answer),
    )
}

fn nfl() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut valid, mut wrong) = (0, 0);
    while valid < 10_000 {
        let mut e: [f64; 3] = [rng.random(), rng.random(), rng.random()];
        e.sort_by(f64::total_cmp);
        let p: f64 = rng.random();
        let Ok(s) = NflScenario::new(e[1], e[0], e[2], p) else { continue };
        valid += 1;
        let o = specialization_advantage(&s);
        if o.advantageous != (p * e[0] + (1.0 - p) * e[2] < e[1]) {
            wrong += 1;
        }
    }
    let w = specialization_advantage(&NflScenario::new(0.3, 0.1, 0.5, 0.6).unwrap());
    let worked = (w.p_threshold - 0.5).abs() < 1e-12 && (w.risk_special - 0.26).abs() < 1e-12 && w.advantageous;
    outcome(
        wrong == 0 && worked,
        format!("10000 scenarios, {wrong} discrepancies; worked threshold {:.3}, risk {:.3}", w.p_threshold, w.risk_special),
    )
}

fn trimmer_model(bands: &[Band], seed: u64) -> BackendPlan {
    BackendPlan::reference(Pipeline::Ksp).with(
        Role::Trimmer,
        BackendConfig::ErrorModel(ErrorModelConfig::new(bands.to_vec(), Corruption::Auto, seed)),
    )
}

fn error_model() -> Outcome {
    let profile_bands: Vec<Band> = [(1, 8), (9, 16), (17, 24), (25, 32)]
        .iter()
        .zip(PUBLISHED_TRIMMER)
        .map(|(&(lo, hi), a)| Band::new(lo, hi, a))
        .collect();
    let ranges: Vec<DifficultyRange> = profile_bands.iter().map(|&b| b.into()).collect();
    let backend = ErrorModelBackend::new(Role::Trimmer, ErrorModelConfig::new(profile_bands, Corruption::Auto, 707)).unwrap();
    let p = profile_agent(Role::Trimmer, &backend, &ranges, 500, 708).unwrap();
    let mut bands_ok = true;
    let mut measured = Vec::new();
    for (b, want) in p.bands.iter().zip(PUBLISHED_TRIMMER) {
        let sigma = (want * (1.0 - want) / b.samples as f64).sqrt();
        bands_ok &= b.samples == 500 && (b.accuracy - want).abs() <= 3.0 * sigma;
        measured.push(format!("{:.3}", b.accuracy));
    }

    // state sets at size 8 outgrow 32, so the top band is open-ended here
    let e2e_bands = [Band::new(1, 8, 0.54), Band::new(9, 16, 0.24), Band::new(17, 24, 0.07), Band::open(25, 0.05)];
    let r = evaluate_system(Pipeline::Ksp, &trimmer_model(&e2e_bands, 709), &KSP_SIZES, 2000, 710).unwrap();
    let curve: Vec<f64> = r.sizes.iter().map(|s| s.accuracy).collect();
    let declining = curve.windows(2).all(|w| w[1] < w[0]);
    outcome(
        bands_ok && declining,
        format!(
            "bands measured [{}] vs {PUBLISHED_TRIMMER:?} (3 sigma, 500/band); e2e sizes 3-8 [{}]",
            measured.join(", "),
            curve.iter().map(|a| format!("{a:.3}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn wire() -> Outcome {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/wire");
    let mut bad = Vec::new();
    for role in Role::ALL {
        let read = |kind: &str| std::fs::read_to_string(dir.join(format!("{}.{kind}.json", role.name()))).unwrap();
        let (req_text, resp_text) = (read("request"), read("response"));
        let req = AgentRequest::from_payload(role, serde_json::from_str(&req_text).unwrap()).unwrap();
        let resp = respond(&req).unwrap().payload();
        let prompt = system_prompt(role).unwrap();
        let names_ok = [&req.payload(), &resp].iter().all(|v: &&Value| {
            v.as_object().unwrap().keys().all(|k| prompt.contains(&format!("\"{k}\"")))
        });
        if serde_json::to_string(&req.payload()).unwrap() != req_text.trim_end()
            || serde_json::to_string(&resp).unwrap() != resp_text.trim_end()
            || !names_ok
        {
            bad.push(role.name());
        }
    }
    let painter = std::fs::read_to_string(dir.join("painter.response.json")).unwrap();
    let spelled = painter.contains("\"collum_collection\"");
    outcome(
        bad.is_empty() && spelled,
        format!("{} roles, mismatched: {bad:?}; painter emits collum_collection: {spelled}", Role::ALL.len()),
    )
}

fn monotonicity() -> Outcome {
    let levels = [0.3, 0.6, 0.9];
    let grid: Vec<Vec<usize>> = levels
        .iter()
        .map(|&small| {
            levels
                .iter()
                .map(|&large| {
                    let bands = [Band::new(1, 8, small), Band::open(9, large)];
                    evaluate_system(Pipeline::Ksp, &trimmer_model(&bands, 909), &[3, 4, 5], 200, 910)
                        .unwrap()
                        .correct
                })
                .collect()
        })
        .collect();
    let mut violations = 0;
    for i in 0..3 {
        for j in 0..3 {
            if i + 1 < 3 && grid[i + 1][j] < grid[i][j] {
                violations += 1;
            }
            if j + 1 < 3 && grid[i][j + 1] < grid[i][j] {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("correct counts over bands (1-8 rows, 9+ columns) at {levels:?}: {grid:?}, {violations} decreases"),
    )
}

#[test]
fn acceptance() {
    let (runs, took) = tap_runs();
    let checks: Vec<(&str, Outcome)> = vec![
        ("1 ksp oracle equivalence", ksp_oracle()),
        ("2 tap oracle equivalence", tap_oracle(&runs, took)),
        ("3 konig invariant", konig()),
        ("4 tap termination", tap_termination(&runs)),
        ("5 worked trace golden chain", golden_chain()),
        ("6 specialization calculator", nfl()),
        ("7 error-model fidelity", error_model()),
        ("8 wire fidelity", wire()),
        ("9 band monotonicity", monotonicity()),
    ];
    let mut failed = Vec::new();
    for (name, o) in &checks {
        report(&format!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail));
        if !o.pass {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
