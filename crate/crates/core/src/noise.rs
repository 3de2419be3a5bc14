//! Global and local depolarizing noise acting on the witness state, closed-form
//! noisy scores, and detection thresholds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{insert_slot, partial_trace, ComplexMatrix, ExactRational, HermitianOperator};
use crate::spin::SpinEnsemble;
use crate::states::QuantumState;
use crate::witness::{check_odd_k, witness_report};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NoiseModel {
    /// `rho -> p 1/d + (1 - p) rho` on the whole ensemble.
    Global { p: f64 },
    /// Independent depolarizing channel on each particle.
    Local { p: Vec<f64> },
}

fn check_probability(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(p)
}

impl NoiseModel {
    pub fn global(p: f64) -> Result<Self> {
        Ok(Self::Global {
            p: check_probability(p)?,
        })
    }

    pub fn local(p: Vec<f64>) -> Result<Self> {
        for &x in &p {
            check_probability(x)?;
        }
        Ok(Self::Local { p })
    }

    /// Same parameter on each of `n` particles.
    pub fn local_identical(p: f64, n: usize) -> Result<Self> {
        Self::local(vec![p; n])
    }
}

/// Applies the channel and returns the resulting density matrix.
pub fn apply_depolarizing(state: &QuantumState, model: &NoiseModel) -> Result<QuantumState> {
    let ensemble = state.ensemble();
    let rho = state.density_matrix();
    let d = ensemble.dim();
    let out = match model {
        NoiseModel::Global { p } => {
            check_probability(*p)?;
            rho.combine(1.0 - p, &HermitianOperator::identity(d), p / d as f64)
        }
        NoiseModel::Local { p } => {
            if p.len() != ensemble.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} local noise parameters for {} particles",
                    p.len(),
                    ensemble.len()
                )));
            }
            let dims = ensemble.local_dims();
            let mut cur = rho.into_matrix();
            for (slot, &pn) in p.iter().enumerate() {
                check_probability(pn)?;
                if pn == 0.0 {
                    continue;
                }
                cur = depolarize_slot(&cur, &dims, slot, pn)?;
            }
            HermitianOperator::symmetrized(cur)
        }
    };
    Ok(QuantumState::from_density_unchecked(ensemble, out))
}

/// `p (1_n/d_n) ⊗ tr_n(rho) + (1 - p) rho`
fn depolarize_slot(rho: &ComplexMatrix, dims: &[usize], slot: usize, p: f64) -> Result<ComplexMatrix> {
    let dn = dims[slot];
    let mixed = ComplexMatrix::identity(dn).scale_real(1.0 / dn as f64);
    let replaced = if dims.len() == 1 {
        mixed.scale(rho.trace())
    } else {
        let rest: Vec<usize> = (0..dims.len()).filter(|&s| s != slot).collect();
        let reduced = partial_trace(rho, dims, &rest)?;
        insert_slot(&reduced, &mixed, dims, slot)?
    };
    Ok(&replaced.scale_real(p) + &rho.scale_real(1.0 - p))
}

/// Score of `|P+K>` after global depolarizing noise,
/// `1/2 + 2 (1 - p) (P_sep - 1/2)`.
pub fn noisy_score_global(k: usize, p: f64) -> Result<f64> {
    check_probability(p)?;
    let report = witness_report(k as i64)?;
    Ok(0.5 + 2.0 * (1.0 - p) * (report.p_sep.value - 0.5))
}

pub fn noisy_score_global_exact(k: usize, p: &ExactRational) -> Result<ExactRational> {
    check_probability(p.to_f64())?;
    let report = witness_report(k as i64)?;
    let one = ExactRational::from_integer(1);
    let half = ExactRational::half();
    let excess = &report.p_sep.exact - &half;
    Ok(&half + &(&(&ExactRational::from_integer(2) * &(&one - p)) * &excess))
}

/// Score of `|P+K>` after local depolarizing noise,
/// `1/2 + 2 prod_n (1 - p_n) (P_sep - 1/2)`.
pub fn noisy_score_local(ensemble: &SpinEnsemble, p: &[f64]) -> Result<f64> {
    if p.len() != ensemble.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} local noise parameters for {} particles",
            p.len(),
            ensemble.len()
        )));
    }
    let survive: f64 = p
        .iter()
        .map(|&x| check_probability(x).map(|x| 1.0 - x))
        .product::<Result<f64>>()?;
    let report = witness_report(ensemble.k() as i64)?;
    Ok(0.5 + 2.0 * survive * (report.p_sep.value - 0.5))
}

pub fn noisy_score_local_exact(ensemble: &SpinEnsemble, p: &[ExactRational]) -> Result<ExactRational> {
    if p.len() != ensemble.len() {
        return Err(Error::DimensionMismatch("one noise parameter per particle".into()));
    }
    let one = ExactRational::from_integer(1);
    let mut survive = one.clone();
    for x in p {
        check_probability(x.to_f64())?;
        survive = &survive * &(&one - x);
    }
    let report = witness_report(ensemble.k() as i64)?;
    let half = ExactRational::half();
    let excess = &report.p_sep.exact - &half;
    Ok(&half + &(&(&ExactRational::from_integer(2) * &survive) * &excess))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionThresholds {
    /// Global noise below this is detected.
    pub global: f64,
    /// Identical local noise below `1 - 2^(-1/N)` is detected.
    pub local_identical: f64,
    /// Global noise below `1/[2(1 - 2^-K)]` leaves GHZ states genuinely
    /// multipartite entangled; comparison constant only.
    pub global_gme_limit: f64,
    pub global_gme_limit_exact: ExactRational,
}

pub fn detection_thresholds(ensemble: &SpinEnsemble) -> DetectionThresholds {
    let kk = ensemble.k();
    let n = ensemble.len() as f64;
    let one = ExactRational::from_integer(1);
    let limit = &ExactRational::half() * &reciprocal(&(&one - &ExactRational::pow2_neg(kk as u32)));
    DetectionThresholds {
        global: 0.5,
        local_identical: 1.0 - 2f64.powf(-1.0 / n),
        global_gme_limit: limit.to_f64(),
        global_gme_limit_exact: limit,
    }
}

fn reciprocal(x: &ExactRational) -> ExactRational {
    ExactRational::new(x.denom().clone(), x.numer().clone())
}

/// Strict violation of the separable bound.
pub fn is_detected(score: f64, k: usize) -> Result<bool> {
    let kk = check_odd_k(k as i64)?;
    Ok(score > witness_report(kk as i64)?.p_sep.value)
}
