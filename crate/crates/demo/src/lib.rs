//! Browser bindings for the one-bit compressed sensing solver.
//!
//! Three operations are exposed to JavaScript, all returning JSON strings
//! so the page needs no framework: [`recover`] runs one solve and reports
//! the reconstruction next to the ground truth, [`sweep`] runs a small
//! Monte-Carlo comparison of the two penalties over a range of sparsity
//! levels, and [`instance_json`] exports an instance in the CLI's file
//! format.
//!
//! The `*_impl` functions hold the actual logic and stay JsValue-free so
//! they can be tested on the host target.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use onebit_cs::bench::{run_benchmark, BenchmarkConfig};
use onebit_cs::loss::PenaltyMode;
use onebit_cs::metrics::{extract_support, score_support, unit_sphere_error};
use onebit_cs::model::ProblemInstance;
use onebit_cs::solver::{solve, SolverConfig};

#[derive(Serialize)]
struct RecoverOutput {
    m: usize,
    n: usize,
    k: usize,
    mode: String,
    truth: Vec<f64>,
    truth_support: Vec<usize>,
    estimate: Vec<f64>,
    support: Vec<usize>,
    objective_trace: Vec<f64>,
    active_trace: Vec<usize>,
    outer_iterations: usize,
    converged: bool,
    false_alarm_rate: f64,
    miss_rate: f64,
    sphere_distance: f64,
}

fn recover_impl(
    m: usize,
    n: usize,
    k: usize,
    seed: u64,
    lambda: f64,
    mode: &str,
    tau: f64,
) -> Result<String, String> {
    let mode: PenaltyMode = mode.parse().map_err(|e: onebit_cs::Error| e.to_string())?;
    let instance = ProblemInstance::generate(m, n, k, seed).map_err(|e| e.to_string())?;
    let truth = instance.truth.as_ref().expect("generated truth").clone();
    let cfg = SolverConfig {
        mode,
        lambda,
        ..SolverConfig::default()
    };
    let result = solve(&instance, &cfg).map_err(|e| e.to_string())?;

    let est_support = extract_support(&result.estimate.view(), tau);
    let score = score_support(truth.support(), &est_support, n).map_err(|e| e.to_string())?;
    let sphere_distance = unit_sphere_error(&truth.coefficients().view(), &result.estimate.view())
        .map_err(|e| e.to_string())?;

    let truth_norm = truth.coefficients().dot(truth.coefficients()).sqrt();
    let output = RecoverOutput {
        m,
        n,
        k,
        mode: mode.to_string(),
        truth: truth.coefficients().iter().map(|v| v / truth_norm).collect(),
        truth_support: truth.support().to_vec(),
        estimate: result.estimate.to_vec(),
        support: est_support,
        objective_trace: result.objective_trace,
        active_trace: result.active_trace,
        outer_iterations: result.outer_iterations,
        converged: result.converged,
        false_alarm_rate: score.false_alarm_rate,
        miss_rate: score.miss_rate,
        sphere_distance,
    };
    Ok(serde_json::to_string(&output).unwrap())
}

#[derive(Serialize)]
struct SweepRow {
    k: usize,
    algorithm: String,
    trials: usize,
    failed: usize,
    false_alarm_rate: f64,
    miss_rate: f64,
    mean_support_size: f64,
    mean_outer_iterations: f64,
}

fn sweep_impl(
    m: usize,
    n: usize,
    k_values: &str,
    trials: usize,
    seed: u64,
    lambda: f64,
    tau: f64,
) -> Result<String, String> {
    let k_values: Vec<usize> = k_values
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("invalid K list: {e}"))?;
    let cfg = BenchmarkConfig {
        m,
        n,
        k_values,
        trials,
        lambda,
        master_seed: seed,
        tau,
        record_timing: false,
        ..BenchmarkConfig::default()
    };
    let rows: Vec<SweepRow> = run_benchmark(&cfg)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|r| SweepRow {
            k: r.k,
            algorithm: r.algorithm,
            trials: r.trials,
            failed: r.failed,
            false_alarm_rate: r.mean_false_alarm_rate,
            miss_rate: r.mean_miss_rate,
            mean_support_size: r.mean_support_size,
            mean_outer_iterations: r.mean_outer_iterations,
        })
        .collect();
    Ok(serde_json::to_string(&rows).unwrap())
}

fn instance_json_impl(m: usize, n: usize, k: usize, seed: u64) -> Result<String, String> {
    let instance = ProblemInstance::generate(m, n, k, seed).map_err(|e| e.to_string())?;
    Ok(instance.to_json_string())
}

/// Generates a seeded instance, solves it with the chosen penalty, and
/// returns the truth (unit norm), the estimate, and the recovery scores.
#[wasm_bindgen]
pub fn recover(
    m: usize,
    n: usize,
    k: usize,
    seed: u32,
    lambda: f64,
    mode: &str,
    tau: f64,
) -> Result<String, JsValue> {
    recover_impl(m, n, k, u64::from(seed), lambda, mode, tau)
        .map_err(|e| JsValue::from_str(&e))
}

/// Runs a small paired Monte-Carlo sweep over the given sparsity levels
/// and returns one row per (K, algorithm).
#[wasm_bindgen]
pub fn sweep(
    m: usize,
    n: usize,
    k_values: &str,
    trials: usize,
    seed: u32,
    lambda: f64,
    tau: f64,
) -> Result<String, JsValue> {
    sweep_impl(m, n, k_values, trials, u64::from(seed), lambda, tau)
        .map_err(|e| JsValue::from_str(&e))
}

/// Exports a generated instance in the JSON file format understood by the
/// CLI (`onebit-cs solve --instance ...`).
#[wasm_bindgen]
pub fn instance_json(m: usize, n: usize, k: usize, seed: u32) -> Result<String, JsValue> {
    instance_json_impl(m, n, k, u64::from(seed)).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recover_reports_consistent_shapes() {
        let out = recover_impl(60, 30, 3, 7, 0.5, "gauss", 1e-2).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(parsed["truth"].as_array().unwrap().len(), 30);
        assert_eq!(parsed["estimate"].as_array().unwrap().len(), 30);
        assert_eq!(parsed["truth_support"].as_array().unwrap().len(), 3);
        assert!(parsed["sphere_distance"].as_f64().unwrap() >= 0.0);
    }

    #[test]
    fn recover_rejects_unknown_modes() {
        let err = recover_impl(20, 10, 2, 1, 0.5, "ridge", 1e-2).unwrap_err();
        assert!(err.contains("ridge"));
    }

    #[test]
    fn sweep_produces_one_row_per_cell() {
        let out = sweep_impl(30, 12, "1,2", 3, 5, 0.5, 1e-2).unwrap();
        let rows: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(rows.as_array().unwrap().len(), 4);
    }

    #[test]
    fn sweep_rejects_malformed_k_lists() {
        assert!(sweep_impl(30, 12, "1,two", 3, 5, 0.5, 1e-2).is_err());
    }

    #[test]
    fn exported_instances_reload_in_the_core_format() {
        let text = instance_json_impl(25, 10, 2, 3).unwrap();
        let inst = ProblemInstance::from_json_str(&text).unwrap();
        assert_eq!(inst.m(), 25);
        assert_eq!(inst.n(), 10);
    }
}
