//! WebAssembly bindings for the browser demo in `www/`. Every export returns
//! a JSON string, or an error message that surfaces as a thrown JS string.

use serde::Serialize;
use spin_witness::noise::{detection_thresholds, noisy_score_global, noisy_score_local};
use spin_witness::protocol::{run_protocol, ProtocolConfig};
use spin_witness::spin::SpinEnsemble;
use spin_witness::states::{ghz_like, ghz_mixture, p_plus_phase, plus_x_ket, product_state};
use spin_witness::witness::{build_qk_closed_form, score, witness_report};
use wasm_bindgen::prelude::*;

/// Largest K accepted by [`bounds_table`].
pub const MAX_TABLE_K: usize = 401;
/// Largest number of qubits accepted by [`simulate`]; the state is dense.
pub const MAX_SIMULATE_K: usize = 9;
pub const MAX_ROUNDS: u32 = 2_000_000;

#[derive(Serialize)]
struct BoundsRow {
    k: usize,
    p_max: f64,
    p_sep: f64,
    p_classical: f64,
    gap: f64,
    gap_exact: String,
}

#[derive(Serialize)]
struct NoiseCurves {
    k: usize,
    p: Vec<f64>,
    global: Vec<f64>,
    local: Vec<f64>,
    p_sep: f64,
    global_threshold: f64,
    local_threshold: f64,
}

#[derive(Serialize)]
struct Simulation {
    k: usize,
    state: String,
    rounds: u64,
    exact_score: f64,
    p_hat: f64,
    ci_low: f64,
    ci_high: f64,
    p_sep: f64,
    verdict: String,
}

fn to_json(v: &impl Serialize) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Bounds for every odd K from 3 to `k_max`.
#[wasm_bindgen]
pub fn bounds_table(k_max: usize) -> Result<String, String> {
    if !(3..=MAX_TABLE_K).contains(&k_max) {
        return Err(format!("K must lie between 3 and {MAX_TABLE_K}"));
    }
    let rows = (3..=k_max)
        .step_by(2)
        .map(|k| {
            let r = witness_report(k as i64).map_err(|e| e.to_string())?;
            Ok(BoundsRow {
                k,
                p_max: r.p_max.value,
                p_sep: r.p_sep.value,
                p_classical: r.p_classical.value,
                gap: r.gap.value,
                gap_exact: r.gap.exact.to_string(),
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    to_json(&rows)
}

/// Closed-form scores of `|P+>` for K qubits under global and identical
/// local depolarizing noise, sampled at `points` values of p in [0, 1].
#[wasm_bindgen]
pub fn noise_curves(k: usize, points: usize) -> Result<String, String> {
    if points < 2 {
        return Err("need at least two points".into());
    }
    let e = SpinEnsemble::qubits(k).map_err(|e| e.to_string())?;
    let p: Vec<f64> = (0..points).map(|i| i as f64 / (points - 1) as f64).collect();
    let global = p
        .iter()
        .map(|&x| noisy_score_global(k, x))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let local = p
        .iter()
        .map(|&x| noisy_score_local(&e, &vec![x; k]))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let t = detection_thresholds(&e);
    to_json(&NoiseCurves {
        k,
        p,
        global,
        local,
        p_sep: witness_report(k as i64).map_err(|e| e.to_string())?.p_sep.value,
        global_threshold: t.global,
        local_threshold: t.local_identical,
    })
}

/// Runs the randomized measurement protocol on K qubits prepared in
/// `state` ("ghz", "mixture" or "product-x").
#[wasm_bindgen]
pub fn simulate(k: usize, state: &str, rounds: u32, seed: u32) -> Result<String, String> {
    if k > MAX_SIMULATE_K {
        return Err(format!("at most {MAX_SIMULATE_K} qubits in the browser"));
    }
    if rounds == 0 || rounds > MAX_ROUNDS {
        return Err(format!("rounds must lie between 1 and {MAX_ROUNDS}"));
    }
    let e = SpinEnsemble::qubits(k).map_err(|e| e.to_string())?;
    let s = match state {
        "ghz" => ghz_like(&e, p_plus_phase(k)),
        "mixture" => ghz_mixture(&e),
        "product-x" => product_state(&e, &e.spins().iter().map(|&j| plus_x_ket(j)).collect::<Vec<_>>())
            .map_err(|e| e.to_string())?,
        other => return Err(format!("unknown state {other:?}")),
    };
    let exact_score = score(&s, &build_qk_closed_form(&e, 0.0)).map_err(|e| e.to_string())?;
    let est = run_protocol(&ProtocolConfig::new(s, rounds as u64, seed as u64)).map_err(|e| e.to_string())?;
    to_json(&Simulation {
        k,
        state: state.to_owned(),
        rounds: est.rounds,
        exact_score,
        p_hat: est.p_hat,
        ci_low: est.ci_low,
        ci_high: est.ci_high,
        p_sep: est.p_sep,
        verdict: est.verdict.to_string(),
    })
}
