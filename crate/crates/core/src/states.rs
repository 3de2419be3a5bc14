//! Pure and mixed states of a spin ensemble, including the GHZ-like family.
//!
//! Random kets: a `ChaCha8Rng` seeded with `seed_from_u64(seed)` draws, for
//! each amplitude in basis order, the real part then the imaginary part from
//! `rand_distr::StandardNormal`; the vector is then normalized. This gives
//! Haar-distributed kets and is fixed for a given seed.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    eigenvalues, kron_vec, norm, normalized, partial_trace, require_same_dim, ComplexMatrix, HermitianOperator, ZERO,
};
use crate::spin::SpinEnsemble;

pub const KET_NORM_TOL: f64 = 1e-12;
pub const DENSITY_TRACE_TOL: f64 = 1e-12;
pub const DENSITY_PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum StateData {
    Ket(Vec<Complex64>),
    Density(HermitianOperator),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    ensemble: SpinEnsemble,
    data: StateData,
}

impl QuantumState {
    pub fn from_ket(ensemble: &SpinEnsemble, ket: Vec<Complex64>) -> Result<Self> {
        require_same_dim(ket.len(), ensemble.dim(), "ket length vs ensemble dimension")?;
        let n = norm(&ket);
        if (n - 1.0).abs() > KET_NORM_TOL {
            return Err(Error::InvalidState(format!("ket norm {n} is not 1")));
        }
        Ok(Self {
            ensemble: ensemble.clone(),
            data: StateData::Ket(ket),
        })
    }

    /// Validates trace and positivity of a density matrix.
    pub fn from_density(ensemble: &SpinEnsemble, rho: ComplexMatrix) -> Result<Self> {
        let rho = HermitianOperator::new(rho)?;
        require_same_dim(rho.dim(), ensemble.dim(), "density matrix vs ensemble dimension")?;
        let tr = rho.matrix().trace();
        if (tr.re - 1.0).abs() > DENSITY_TRACE_TOL || tr.im.abs() > DENSITY_TRACE_TOL {
            return Err(Error::InvalidState(format!("density matrix trace {tr} is not 1")));
        }
        let min = eigenvalues(&rho)[0];
        if min < -DENSITY_PSD_TOL {
            return Err(Error::InvalidState(format!("density matrix has eigenvalue {min}")));
        }
        Ok(Self {
            ensemble: ensemble.clone(),
            data: StateData::Density(rho),
        })
    }

    /// Wraps a density matrix produced by a trace-preserving channel.
    pub(crate) fn from_density_unchecked(ensemble: &SpinEnsemble, rho: HermitianOperator) -> Self {
        Self {
            ensemble: ensemble.clone(),
            data: StateData::Density(rho),
        }
    }

    pub fn maximally_mixed(ensemble: &SpinEnsemble) -> Self {
        let d = ensemble.dim();
        Self::from_density_unchecked(ensemble, HermitianOperator::identity(d).scale(1.0 / d as f64))
    }

    pub fn ensemble(&self) -> &SpinEnsemble {
        &self.ensemble
    }

    pub fn data(&self) -> &StateData {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.ensemble.dim()
    }

    pub fn ket(&self) -> Option<&[Complex64]> {
        match &self.data {
            StateData::Ket(v) => Some(v),
            StateData::Density(_) => None,
        }
    }

    pub fn density_matrix(&self) -> HermitianOperator {
        match &self.data {
            StateData::Ket(v) => HermitianOperator::projector(v),
            StateData::Density(rho) => rho.clone(),
        }
    }

    pub fn to_density(&self) -> Self {
        Self::from_density_unchecked(&self.ensemble, self.density_matrix())
    }

    /// `tr(rho A)`
    pub fn expectation(&self, op: &HermitianOperator) -> Result<f64> {
        require_same_dim(op.dim(), self.dim(), "operator vs state dimension")?;
        match &self.data {
            StateData::Ket(v) => op.expectation(v),
            StateData::Density(rho) => {
                let (a, b) = (rho.matrix(), op.matrix());
                let d = self.dim();
                let mut acc = ZERO;
                for i in 0..d {
                    for j in 0..d {
                        acc += a[(i, j)] * b[(j, i)];
                    }
                }
                Ok(acc.re)
            }
        }
    }

    /// Reduced density matrix on the given particles (ascending, proper subset).
    pub fn reduced(&self, keep: &[usize]) -> Result<ComplexMatrix> {
        partial_trace(self.density_matrix().matrix(), &self.ensemble.local_dims(), keep)
    }

    pub fn trace(&self) -> f64 {
        match &self.data {
            StateData::Ket(v) => norm(v).powi(2),
            StateData::Density(rho) => rho.trace(),
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match &self.data {
            StateData::Ket(_) => 0.0,
            StateData::Density(rho) => eigenvalues(rho)[0],
        }
    }
}

/// `(⊗|j_n, j_n> + e^{i phi} ⊗|j_n, -j_n>)/sqrt 2`.
pub fn ghz_like(ensemble: &SpinEnsemble, phi: f64) -> QuantumState {
    let d = ensemble.dim();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = vec![ZERO; d];
    v[ensemble.stretched_up_index()] += Complex64::new(s, 0.0);
    v[ensemble.stretched_down_index()] += Complex64::from_polar(s, phi);
    QuantumState::from_ket(ensemble, v).expect("normalized by construction")
}

/// Phase of `ghz_like` that reproduces `|P+K>` of the unrotated witness.
pub fn p_plus_phase(k: usize) -> f64 {
    std::f64::consts::PI * ((k - 1) / 2) as f64
}

/// Equal incoherent mixture of the two stretched states.
pub fn ghz_mixture(ensemble: &SpinEnsemble) -> QuantumState {
    let d = ensemble.dim();
    let mut diag = vec![0.0; d];
    diag[ensemble.stretched_up_index()] += 0.5;
    diag[ensemble.stretched_down_index()] += 0.5;
    QuantumState::from_density_unchecked(ensemble, HermitianOperator::from_real_diagonal(&diag))
}

/// Tensor product of one normalized ket per particle.
pub fn product_state(ensemble: &SpinEnsemble, local_kets: &[Vec<Complex64>]) -> Result<QuantumState> {
    require_same_dim(local_kets.len(), ensemble.len(), "number of local kets vs particles")?;
    let mut acc = vec![Complex64::new(1.0, 0.0)];
    for (n, (ket, spin)) in local_kets.iter().zip(ensemble.spins()).enumerate() {
        if ket.len() != spin.dim() {
            return Err(Error::DimensionMismatch(format!(
                "particle {n} has spin {spin} (dimension {}) but ket has length {}",
                spin.dim(),
                ket.len()
            )));
        }
        let nk = norm(ket);
        if (nk - 1.0).abs() > KET_NORM_TOL {
            return Err(Error::InvalidState(format!("local ket {n} has norm {nk}")));
        }
        acc = kron_vec(&acc, ket);
    }
    // product of unit vectors can drift by a few ulps
    let acc = normalized(&acc).expect("nonzero");
    QuantumState::from_ket(ensemble, acc)
}

/// Haar-random unit vector drawn from an existing generator.
pub fn random_unit_vector(dim: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        if let Some(u) = normalized(&v) {
            return u;
        }
    }
}

pub fn random_ket(ensemble: &SpinEnsemble, seed: u64) -> QuantumState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = random_unit_vector(ensemble.dim(), &mut rng);
    QuantumState::from_ket(ensemble, v).expect("normalized")
}

/// Spin-coherent state along `+x` for a single spin: the top eigenvector of `J_x`.
pub fn plus_x_ket(spin: crate::spin::Spin) -> Vec<Complex64> {
    let (jx, _, _) = crate::spin::spin_matrices(spin);
    let evd = crate::linalg::hermitian_eigendecompose(&jx);
    let mut v = evd.vector(spin.dim() - 1);
    // fix the global phase so the m = j amplitude is real positive
    if v[0].norm() > 0.0 {
        let p = v[0].conj() / v[0].norm();
        v.iter_mut().for_each(|z| *z *= p);
    }
    v
}
