//! The witness observable `Q_K = (1/K) sum_k pos(J_k)`, its closed form, the
//! exact bounds, and the odd-function generalization.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{binomial_exact, spectral_function, ComplexMatrix, ExactRational, HermitianOperator, ZERO};
use crate::spin::{spin_matrices, CollectiveOperator, Spin, SpinEnsemble};
use crate::states::QuantumState;

/// Eigenvalues with `|lambda|` below this count as zero in `pos`.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-9;

/// `pos(x) = 1, 1/2, 0` for `x > 0`, `x = 0`, `x < 0`.
pub fn pos(x: f64) -> f64 {
    if x.abs() < ZERO_EIGENVALUE_TOL {
        0.5
    } else if x > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Spectral `pos`: projector onto the positive eigenspace plus half the
/// projector onto the kernel.
pub fn pos_operator(op: &HermitianOperator) -> HermitianOperator {
    spectral_function(op, pos)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Construction {
    Direct,
    ClosedForm,
}

#[derive(Debug, Clone)]
pub struct WitnessOperator {
    ensemble: SpinEnsemble,
    theta_offset: f64,
    q: HermitianOperator,
    construction: Construction,
}

impl WitnessOperator {
    pub fn ensemble(&self) -> &SpinEnsemble {
        &self.ensemble
    }

    pub fn k(&self) -> usize {
        self.ensemble.k()
    }

    pub fn theta_offset(&self) -> f64 {
        self.theta_offset
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.q
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }
}

/// `Q_K` as the literal average of the spectral `pos` of every direction.
pub fn build_qk_direct(ensemble: &SpinEnsemble, theta_offset: f64) -> WitnessOperator {
    let j = CollectiveOperator::new(ensemble);
    let kk = ensemble.k();
    let mut acc = HermitianOperator::zeros(ensemble.dim());
    for k in 0..kk {
        let jk = j.direction(k, theta_offset).expect("k < K");
        acc = &acc + &pos_operator(&jk);
    }
    WitnessOperator {
        ensemble: ensemble.clone(),
        theta_offset,
        q: acc.scale(1.0 / kk as f64),
        construction: Construction::Direct,
    }
}

/// `2^-(K-1) C(K-1, (K-1)/2)`, the weight of the GHZ-like projectors in `Q_K`.
pub fn ghz_weight(kk: usize) -> ExactRational {
    let c = binomial_exact(kk as u64 - 1, (kk as u64 - 1) / 2).expect("k <= n");
    &ExactRational::from(c) * &ExactRational::pow2_neg(kk as u32 - 1)
}

/// Relative phase between the stretched states in `|P+K>` for a witness
/// rotated by `theta_offset`.
fn p_plus_phase(kk: usize, theta_offset: f64) -> f64 {
    PI * ((kk - 1) / 2) as f64 + theta_offset * kk as f64
}

/// `|P+-K>` of the (rotated) witness: `(|up> ± e^{i psi} |down>)/sqrt 2`.
pub fn ghz_eigenvectors(ensemble: &SpinEnsemble, theta_offset: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let d = ensemble.dim();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let phase = Complex64::from_polar(1.0, p_plus_phase(ensemble.k(), theta_offset));
    let mut plus = vec![ZERO; d];
    let mut minus = vec![ZERO; d];
    plus[ensemble.stretched_up_index()] = Complex64::new(s, 0.0);
    minus[ensemble.stretched_up_index()] = Complex64::new(s, 0.0);
    plus[ensemble.stretched_down_index()] = phase * s;
    minus[ensemble.stretched_down_index()] = -phase * s;
    (plus, minus)
}

/// `Q_K = 1/2 [1 + w (|P+><P+| - |P-><P-|)]` with `w` from [`ghz_weight`].
pub fn build_qk_closed_form(ensemble: &SpinEnsemble, theta_offset: f64) -> WitnessOperator {
    let d = ensemble.dim();
    let w = ghz_weight(ensemble.k()).to_f64();
    let (plus, minus) = ghz_eigenvectors(ensemble, theta_offset);
    let diff = &ComplexMatrix::outer(&plus, &plus) - &ComplexMatrix::outer(&minus, &minus);
    let q = &ComplexMatrix::identity(d) + &diff.scale_real(w);
    WitnessOperator {
        ensemble: ensemble.clone(),
        theta_offset,
        q: HermitianOperator::symmetrized(q.scale_real(0.5)),
        construction: Construction::ClosedForm,
    }
}

/// An exact rational together with its float rendering.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactValue {
    pub exact: ExactRational,
    pub value: f64,
}

impl From<ExactRational> for ExactValue {
    fn from(exact: ExactRational) -> Self {
        let value = exact.to_f64();
        Self { exact, value }
    }
}

/// Every scalar bound of the witness for one `K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub k: usize,
    /// Largest eigenvalue of `Q_K`, reached by `|P+K>`.
    pub p_max: ExactValue,
    /// Maximum over states separable across any bipartition.
    pub p_sep: ExactValue,
    /// Maximum for a classical precessing vector, `(1 + 1/K)/2`.
    pub p_classical: ExactValue,
    pub gap: ExactValue,
}

pub fn check_odd_k(k: i64) -> Result<usize> {
    if k < 1 || k % 2 == 0 {
        return Err(Error::InvalidK(k));
    }
    Ok(k as usize)
}

pub fn witness_report(k: i64) -> Result<WitnessReport> {
    let kk = check_odd_k(k)?;
    let half = ExactRational::half();
    let w = ghz_weight(kk);
    // P_max = 1/2 (1 + w), P_sep = 1/2 (1 + w/2), gap = w/4
    let p_max = &half * &(&ExactRational::from_integer(1) + &w);
    let p_sep = &half * &(&ExactRational::from_integer(1) + &(&w * &half));
    let gap = &w * &ExactRational::new(1, 4);
    let p_classical = &half * &ExactRational::new(kk as u64 + 1, kk as u64);
    Ok(WitnessReport {
        k: kk,
        p_max: p_max.into(),
        p_sep: p_sep.into(),
        p_classical: p_classical.into(),
        gap: gap.into(),
    })
}

/// Protocol score `P_K = tr(rho Q_K)`.
pub fn score(state: &QuantumState, q: &WitnessOperator) -> Result<f64> {
    if state.ensemble() != q.ensemble() {
        return Err(Error::DimensionMismatch(format!(
            "state on {} but witness on {}",
            state.ensemble(),
            q.ensemble()
        )));
    }
    state.expectation(q.operator())
}

/// Offset angle under which the GHZ-like state `|up> + e^{i phi}|down>` is
/// the top eigenvector of the rotated witness.
pub fn phase_for_ghz(phi: f64, k: usize) -> f64 {
    (2.0 * phi - (k as f64 - 1.0) * PI) / (2.0 * k as f64)
}

/// Witness with `pos` replaced by `f0 + f_odd`.
#[derive(Debug, Clone, Serialize)]
pub struct GeneralizedWitness {
    pub k: usize,
    pub f0: f64,
    /// `|<K/2, K/2| f_odd(J_x) |K/2, -K/2>|`
    pub f_k: f64,
    /// `f0 + f_k / 2`
    pub sep_bound: f64,
    /// `f0 + f_k`, attained by the matching GHZ-like state.
    pub max_score: f64,
}

impl GeneralizedWitness {
    /// The witness detects GHZ-like states only if the coupling is nonzero.
    pub fn detects_ghz(&self) -> bool {
        self.f_k > 1e-12
    }
}

/// Spot-checks `f(0) = 0` and `f(-x) = -f(x)` on the given points.
pub fn check_odd(f: &dyn Fn(f64) -> f64, points: &[f64]) -> Result<()> {
    let f0 = f(0.0);
    if f0.abs() > 1e-12 {
        return Err(Error::NotOdd {
            x: 0.0,
            fx: f0,
            fmx: f0,
        });
    }
    for &x in points {
        let (a, b) = (f(x), f(-x));
        if (a + b).abs() > 1e-12 * a.abs().max(1.0) {
            return Err(Error::NotOdd { x, fx: a, fmx: b });
        }
    }
    Ok(())
}

/// Builds the generalized witness. `f_odd(J_x)` is evaluated on the spin-K/2
/// block spanned by the stretched product states and their symmetric
/// descendants, which `J_x` leaves invariant.
pub fn generalized_witness(ensemble: &SpinEnsemble, f0: f64, f_odd: &dyn Fn(f64) -> f64) -> Result<GeneralizedWitness> {
    let kk = ensemble.k();
    let top = Spin::from_twice(kk as u32);
    let half_k = kk as f64 / 2.0;
    let mut grid: Vec<f64> = (0..=kk).map(|i| half_k - i as f64).collect();
    grid.extend((1..=64).map(|i| (half_k + 1.0) * i as f64 / 64.0));
    check_odd(f_odd, &grid)?;
    let (jx, _, _) = spin_matrices(top);
    let f = spectral_function(&jx, f_odd);
    let f_k = f.matrix()[(0, kk)].norm();
    Ok(GeneralizedWitness {
        k: kk,
        f0,
        f_k,
        sep_bound: f0 + f_k / 2.0,
        max_score: f0 + f_k,
    })
}

/// Full-space observable `(1/K) sum_k [f0 + f_odd(J_k)]`, the generalized
/// counterpart of [`build_qk_direct`].
pub fn build_generalized_operator(
    ensemble: &SpinEnsemble,
    f0: f64,
    f_odd: &dyn Fn(f64) -> f64,
    theta_offset: f64,
) -> WitnessOperator {
    let j = CollectiveOperator::new(ensemble);
    let kk = ensemble.k();
    let d = ensemble.dim();
    let mut acc = HermitianOperator::identity(d).scale(f0);
    for k in 0..kk {
        let jk = j.direction(k, theta_offset).expect("k < K");
        acc = &acc + &spectral_function(&jk, f_odd).scale(1.0 / kk as f64);
    }
    WitnessOperator {
        ensemble: ensemble.clone(),
        theta_offset,
        q: acc,
        construction: Construction::Direct,
    }
}
