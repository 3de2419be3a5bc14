use spin_witness::separable::{
    enumerate_bipartitions, grid_certify, seesaw_all, seesaw_maximize, Bipartition, SeeSawConfig,
};
use spin_witness::spin::SpinEnsemble;
use spin_witness::witness::{build_qk_closed_form, build_qk_direct, witness_report};

fn ens(spins: &[f64]) -> SpinEnsemble {
    SpinEnsemble::from_values(spins).unwrap()
}

#[test]
fn seesaw_matches_bound_on_every_bipartition() {
    for spins in [
        &[0.5, 0.5, 0.5][..],
        &[0.5; 5],
        &[1.0, 0.5],
        &[0.5, 1.0, 1.0],
        &[1.5, 0.5, 0.5],
    ] {
        let e = ens(spins);
        let q = build_qk_closed_form(&e, 0.4);
        let p_sep = witness_report(e.k() as i64).unwrap().p_sep.value;
        let cfg = SeeSawConfig {
            restarts: 8,
            seed: 5,
            ..Default::default()
        };
        let results = seesaw_all(&q, &cfg).unwrap();
        let values: Vec<f64> = results.iter().map(|r| r.best_value).collect();
        for r in &results {
            assert!(
                r.best_value <= p_sep + 1e-9 && r.best_value >= p_sep - 1e-6,
                "{spins:?} {}",
                r.bipartition.label()
            );
            assert!(r.monotone, "non-monotone see-saw on {}", r.bipartition.label());
            assert!(r.seeded_history[1] >= p_sep - 1e-9);
        }
        let spread = values.iter().cloned().fold(f64::MIN, f64::max) - values.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 1e-6);
    }
}

#[test]
fn seesaw_on_noncontiguous_split() {
    let e = ens(&[0.5; 5]);
    let q = build_qk_direct(&e, 0.0);
    let p_sep = witness_report(5).unwrap().p_sep.value;
    let b = Bipartition::new(&e, &[0, 3]).unwrap();
    let r = seesaw_maximize(
        &q,
        &b,
        &SeeSawConfig {
            restarts: 16,
            seed: 99,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(r.best_value <= p_sep + 1e-9 && r.best_value >= p_sep - 1e-6);
    assert!(r.converged && r.iterations <= 200);
    let norms = (
        spin_witness::linalg::norm(&r.best_kets.0),
        spin_witness::linalg::norm(&r.best_kets.1),
    );
    assert!((norms.0 - 1.0).abs() < 1e-12 && (norms.1 - 1.0).abs() < 1e-12);
}

#[test]
fn seesaw_is_deterministic() {
    let e = ens(&[0.5, 1.0, 1.0]);
    let q = build_qk_closed_form(&e, 0.0);
    let b = Bipartition::new(&e, &[0, 2]).unwrap();
    let cfg = SeeSawConfig {
        restarts: 6,
        seed: 3,
        ..Default::default()
    };
    let a = seesaw_maximize(&q, &b, &cfg).unwrap();
    let c = seesaw_maximize(&q, &b, &cfg).unwrap();
    assert_eq!(a.best_value.to_bits(), c.best_value.to_bits());
    assert_eq!(a.best_kets, c.best_kets);
}

#[test]
fn grid_sweep_agrees_with_seesaw() {
    for (spins, subset) in [
        (&[0.5, 0.5, 0.5][..], &[0usize][..]),
        (&[1.0, 0.5], &[0]),
        (&[0.5, 0.5, 0.5], &[0, 2]),
    ] {
        let e = ens(spins);
        let q = build_qk_closed_form(&e, 0.0);
        let b = Bipartition::new(&e, subset).unwrap();
        let g = grid_certify(&q, &b, 64).unwrap();
        assert!((0.615..=0.625 + 1e-9).contains(&g), "{spins:?}: {g}");
        assert!(grid_certify(&q, &b, 32).unwrap() <= g + 1e-15);
    }
}

#[test]
fn bipartition_enumeration() {
    assert_eq!(enumerate_bipartitions(&ens(&[0.5; 5])).unwrap().len(), 15);
    for b in enumerate_bipartitions(&ens(&[0.5, 1.0, 1.0])).unwrap() {
        assert_eq!(b.j_tilde.twice() + b.j_tilde_prime.twice(), 5);
        assert!(b.subset.contains(&0));
    }
}
