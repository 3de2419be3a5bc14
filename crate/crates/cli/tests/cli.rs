use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn spinwit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinwit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = spinwit(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn golden(name: &str) -> String {
    fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn table_matches_golden_files() {
    assert_eq!(stdout(&["table", "--K", "3,5,19,4"]), golden("table.csv"));
    assert_eq!(
        stdout(&["table", "--K", "3,5", "--format", "json"]),
        golden("table.json")
    );
}

#[test]
fn table_rows() {
    let text = stdout(&["table", "--K", "3,19,401"]);
    let rows = csv_rows(&text);
    assert_eq!(
        &rows[0][..9],
        [
            "3",
            "3/4",
            "0.75",
            "5/8",
            "0.625",
            "2/3",
            "0.6666666666666666",
            "1/8",
            "0.125"
        ]
    );
    let gap19: f64 = rows[1][8].parse().unwrap();
    assert!((gap19 - 0.046368).abs() < 1e-6);
    assert!(rows[2][8].parse::<f64>().unwrap() < 0.01);
}

#[test]
fn table_rejects_only_even_rows() {
    let out = spinwit(&["table", "--K", "2,3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .ends_with("\"K must be a positive odd integer, got 2\""));
    assert_eq!(spinwit(&["table", "--K", "2,-1"]).status.code(), Some(2));
}

#[test]
fn verify_passes_on_odd_ensembles() {
    for spins in ["0.5,0.5,0.5", "1,0.5", "0.5,1,1"] {
        let v: Value = serde_json::from_str(&stdout(&["verify", "--spins", spins, "--format", "json"])).unwrap();
        let checks = v["rows"].as_array().unwrap();
        assert!(checks.iter().all(|c| c["pass"] == true), "{spins}");
        let separable: Vec<f64> = checks
            .iter()
            .filter(|c| c["suite"] == "separable")
            .map(|c| c["value"].as_f64().unwrap())
            .collect();
        assert!(!separable.is_empty());
        if spins == "0.5,0.5,0.5" {
            assert_eq!(separable.len(), 3);
            assert!(separable.iter().all(|s| (s - 0.625).abs() < 1e-9));
        }
    }
}

#[test]
fn verify_rejects_integer_total_spin() {
    let out = spinwit(&["verify", "--spins", "0.5,0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("K = 2") && err.contains("odd"), "{err}");
    assert_eq!(spinwit(&["verify", "--spins", "0.7,0.5"]).status.code(), Some(2));
}

fn flip(text: &str) -> (f64, f64) {
    let rows: Vec<(f64, bool)> = csv_rows(text)
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[4].parse().unwrap()))
        .collect();
    let i = rows.iter().position(|r| !r.1).unwrap();
    assert!(rows[..i].iter().all(|r| r.1) && rows[i..].iter().all(|r| !r.1));
    (rows[i - 1].0, rows[i].0)
}

#[test]
fn noise_sweep_flips_at_thresholds() {
    assert_eq!(
        stdout(&["noise-sweep", "--K", "3", "--grid", "0:1:0.1"]),
        golden("noise_global_k3.csv")
    );
    let global = stdout(&["noise-sweep", "--K", "3", "--model", "global"]);
    assert_eq!(flip(&global), (0.45, 0.5));
    let local = stdout(&["noise-sweep", "--spins", "0.5,0.5,0.5", "--model", "local"]);
    assert_eq!(flip(&local), (0.2, 0.25));
    for text in [&global, &local] {
        for row in csv_rows(text) {
            let closed: f64 = row[1].parse().unwrap();
            let brute: f64 = row[2].parse().unwrap();
            assert!((closed - brute).abs() < 1e-10);
        }
        assert_eq!(csv_rows(text)[0][1], "0.75");
    }
    let mixed = stdout(&["noise-sweep", "--spins", "1,0.5", "--model", "local", "--phi", "0.4"]);
    assert_eq!(csv_rows(&mixed).len(), 21);
}

#[test]
fn noise_sweep_rejects_bad_grids() {
    for grid in ["0:1", "0:1:0", "1:0:0.1", "0:1.5:0.1", "x:1:0.1"] {
        assert_eq!(
            spinwit(&["noise-sweep", "--grid", grid]).status.code(),
            Some(2),
            "{grid}"
        );
    }
}

#[test]
fn simulate_verdicts_and_determinism() {
    let args = ["simulate", "--K", "3", "--rounds", "100000", "--seed", "7"];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["verdict"], "GME-detected");
    assert_eq!(v["per_k_counts"].as_array().unwrap().len(), 3);

    let m: Value = serde_json::from_str(&stdout(&["simulate", "--state", "mixture", "--seed", "7"])).unwrap();
    assert_eq!(m["verdict"], "inconclusive");
    assert_eq!(m["exact_score"].as_f64(), Some(0.5));

    assert_eq!(
        stdout(&[
            "simulate",
            "--K",
            "3",
            "--rounds",
            "2000",
            "--seed",
            "1",
            "--stratified",
            "--omega",
            "1"
        ]),
        golden("simulate_k3.json")
    );
}

#[test]
fn simulate_subensembles_and_noise() {
    let v: Value = serde_json::from_str(&stdout(&[
        "simulate",
        "--spins",
        "1,0.5",
        "--subensembles",
        "1|2",
        "--model",
        "local",
        "--p-list",
        "0.1,0.2",
    ]))
    .unwrap();
    let exact = v["exact_score"].as_f64().unwrap();
    assert!((v["p_hat"].as_f64().unwrap() - exact).abs() < 0.01);
    for bad in [
        &["simulate", "--subensembles", "1|2"][..],
        &["simulate", "--subensembles", "0|1,2"],
        &["simulate", "--p-list", "0.1,0.1,0.1"],
        &["simulate", "--model", "local", "--p-list", "0.1"],
        &["simulate", "--p", "1.5"],
        &["simulate", "--rounds", "0"],
        &["simulate", "--bogus"],
    ] {
        assert_eq!(spinwit(bad).status.code(), Some(2), "{bad:?}");
    }
}

#[test]
fn seesaw_reaches_bound_everywhere() {
    let text = stdout(&[
        "seesaw",
        "--spins",
        "0.5,0.5,0.5,0.5,0.5",
        "--restarts",
        "8",
        "--phi",
        "0.3",
    ]);
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 15);
    assert!(text.starts_with("bipartition,j_tilde,j_tilde_prime,best_value,p_sep,deviation,"));
    for r in &rows {
        assert!(r[r.len() - 2] == "true");
    }
}

#[test]
fn general_witness_rows() {
    let v: Value = serde_json::from_str(&stdout(&["general-witness", "--K", "3,5", "--format", "json"])).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(
        rows[0].as_object().unwrap().keys().collect::<Vec<_>>(),
        ["k", "f_odd", "f0", "f_k", "sep_bound", "max_score", "detects_ghz"]
    );
    assert!((rows[0]["sep_bound"].as_f64().unwrap() - 0.625).abs() < 1e-12);
    assert!((rows[1]["sep_bound"].as_f64().unwrap() - 0.59375).abs() < 1e-12);
    let linear = stdout(&["general-witness", "--K", "3", "--f-odd", "linear"]);
    assert!(linear.trim_end().ends_with(",false"));
    let cubic = stdout(&["general-witness", "--K", "3", "--f-odd", "cubic"]);
    assert!(cubic.trim_end().ends_with(",true"));
    assert_eq!(spinwit(&["general-witness", "--K", "4"]).status.code(), Some(2));
}

#[test]
fn out_writes_manifest_with_checksum() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.json");
    let p = path.to_str().unwrap();
    let out = spinwit(&["simulate", "--rounds", "500", "--seed", "3", "--out", p]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let body = fs::read(&path).unwrap();
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sim.json.manifest.json")).unwrap()).unwrap();
    let keys: Vec<&String> = manifest.as_object().unwrap().keys().collect();
    assert_eq!(
        keys,
        [
            "schema",
            "command",
            "params",
            "seed",
            "version",
            "timestamp",
            "output",
            "output_schema",
            "format",
            "sha256"
        ]
    );
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["params"]["rounds"], 500);
    assert_eq!(manifest["output_schema"], "spinwit.simulate/1");
    assert_eq!(manifest["format"], "json");
    let digest: String = Sha256::digest(&body).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(manifest["sha256"], digest);

    let again = dir.path().join("again.json");
    spinwit(&[
        "simulate",
        "--rounds",
        "500",
        "--seed",
        "3",
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(fs::read(&again).unwrap(), body);
}

#[test]
fn csv_output_file_has_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    assert_eq!(
        spinwit(&["table", "--K", "3", "--out", path.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("k,p_max,p_max_float,"));
    assert!(dir.path().join("t.csv.manifest.json").exists());
}
