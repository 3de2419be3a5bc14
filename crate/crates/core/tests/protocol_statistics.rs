use spin_witness::protocol::{
    compare_estimates, per_k_homogeneity, rounds_needed, run_protocol, run_protocol_subensembles, ProtocolConfig,
    Verdict,
};
use spin_witness::spin::SpinEnsemble;
use spin_witness::states::{ghz_like, ghz_mixture, p_plus_phase, random_ket, QuantumState};
use spin_witness::witness::{build_qk_closed_form, score};

fn p_plus3() -> QuantumState {
    ghz_like(&SpinEnsemble::qubits(3).unwrap(), p_plus_phase(3))
}

#[test]
fn estimator_converges_to_matrix_score() {
    let e = SpinEnsemble::qubits(3).unwrap();
    let q = build_qk_closed_form(&e, 0.0);
    for state in [p_plus3(), random_ket(&e, 4), ghz_like(&e, 0.9)] {
        let exact = score(&state, &q).unwrap();
        for seed in 0..10 {
            let est = run_protocol(&ProtocolConfig::new(state.clone(), 1_000_000, seed)).unwrap();
            assert!(
                (est.p_hat - exact).abs() < 0.002,
                "seed {seed}: {} vs {exact}",
                est.p_hat
            );
        }
    }
}

#[test]
fn wilson_interval_coverage() {
    let state = p_plus3();
    let misses = (100..300)
        .filter(|&seed| {
            let est = run_protocol(&ProtocolConfig::new(state.clone(), 20_000, seed)).unwrap();
            !(est.ci_low <= 0.75 && 0.75 <= est.ci_high)
        })
        .count();
    // Binomial(200, 0.05): mean 10, standard deviation about 3.1.
    assert!(misses <= 20, "{misses} of 200 intervals missed");
}

#[test]
fn ghz_detected_and_mixture_not() {
    let mix = ghz_mixture(&SpinEnsemble::qubits(3).unwrap());
    let mut detected = 0;
    for seed in 0..10 {
        let est = run_protocol(&ProtocolConfig::new(p_plus3(), 100_000, seed)).unwrap();
        assert!((est.p_hat - 0.75).abs() < 0.005);
        detected += (est.verdict == Verdict::GmeDetected) as usize;
        let m = run_protocol(&ProtocolConfig::new(mix.clone(), 100_000, seed)).unwrap();
        assert_eq!(m.verdict, Verdict::Inconclusive);
        assert!(m.ci_low <= 0.5 + 0.01 && m.ci_high >= 0.5 - 0.01);
    }
    assert!(detected >= 9);
}

#[test]
fn per_direction_rates_are_homogeneous() {
    for kk in [3, 5] {
        let s = ghz_like(&SpinEnsemble::qubits(kk).unwrap(), p_plus_phase(kk));
        let est = run_protocol(&ProtocolConfig::new(s, 100_000, 11)).unwrap();
        assert!(per_k_homogeneity(&est).unwrap().p_value > 0.01);
    }
}

#[test]
fn subensembles_match_monolithic_protocol() {
    let s = p_plus3();
    let whole = run_protocol(&ProtocolConfig::new(s.clone(), 100_000, 21)).unwrap();
    for groups in [
        vec![vec![0], vec![1], vec![2]],
        vec![vec![0], vec![1, 2]],
        vec![vec![0, 1, 2]],
    ] {
        let mut cfg = ProtocolConfig::new(s.clone(), 100_000, 22);
        cfg.subensembles = Some(groups.clone());
        let split = run_protocol_subensembles(&cfg).unwrap();
        assert!((split.p_hat - 0.75).abs() < 0.005, "{groups:?}");
        assert!(compare_estimates(&whole, &split).unwrap().p_value > 0.01, "{groups:?}");
        assert_eq!(split, run_protocol_subensembles(&cfg).unwrap());
    }
    // Entangled state on a mixed ensemble.
    let e2 = SpinEnsemble::from_values(&[1.0, 0.5]).unwrap();
    let r = random_ket(&e2, 8);
    let exact = score(&r, &build_qk_closed_form(&e2, 0.0)).unwrap();
    let mut cfg = ProtocolConfig::new(r, 100_000, 5);
    cfg.subensembles = Some(vec![vec![0], vec![1]]);
    let est = run_protocol(&cfg).unwrap();
    assert!((est.p_hat - exact).abs() < 0.006);
}

#[test]
fn sample_size_planning() {
    // Linear-search inversion of the Wilson half-width.
    let n3 = rounds_needed(3, 0.5).unwrap();
    assert_eq!(n3, 842);
    assert_eq!(rounds_needed(3, 0.25).unwrap(), 3378);
    assert_eq!(rounds_needed(19, 0.5).unwrap(), 7005);
    // Planned size detects |P+3> in most runs at margin 0.5.
    let hits = (0..20)
        .filter(|&seed| {
            run_protocol(&ProtocolConfig::new(p_plus3(), n3, seed)).unwrap().verdict == Verdict::GmeDetected
        })
        .count();
    assert!(hits >= 10);
}

#[test]
fn precession_times_reported() {
    let mut cfg = ProtocolConfig::new(p_plus3(), 10, 0);
    cfg.omega = Some(std::f64::consts::TAU);
    let est = run_protocol(&cfg).unwrap();
    let t = est.times.unwrap();
    assert!((t[1] - 1.0 / 3.0).abs() < 1e-15 && (t[2] - 2.0 / 3.0).abs() < 1e-15);
}
