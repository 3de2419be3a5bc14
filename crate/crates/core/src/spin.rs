//! Spin-j matrices, collective angular momentum of an ensemble, and the
//! in-plane measurement directions.
//!
//! Conventions: `hbar = 1`; the local basis of a spin-j particle is ordered by
//! descending `m` (`m = j` first); in the product basis particle 0 is the most
//! significant slot, so the two stretched states are the first and last basis
//! vectors.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigendecompose, kron, require_same_dim, ComplexMatrix, HermitianOperator, SlotLayout};

/// A nonnegative half-integer stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Spin(u32);

impl Spin {
    pub fn from_twice(two_j: u32) -> Self {
        Self(two_j)
    }

    pub fn from_f64(j: f64) -> Result<Self> {
        let two = 2.0 * j;
        if !two.is_finite() || two < -1e-9 || (two - two.round()).abs() > 1e-9 || two.round() > u32::MAX as f64 {
            return Err(Error::InvalidSpin(j));
        }
        Ok(Self(two.round() as u32))
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// `2j + 1`
    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Ordered list of spins whose total `K/2` is a half-integer (odd `K`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SpinEnsemble {
    spins: Vec<Spin>,
}

impl SpinEnsemble {
    pub fn new(spins: Vec<Spin>) -> Result<Self> {
        if spins.is_empty() {
            return Err(Error::InvalidArgument("an ensemble needs at least one particle".into()));
        }
        let k: u64 = spins.iter().map(|s| s.twice() as u64).sum();
        if k.is_multiple_of(2) {
            return Err(Error::EvenK {
                total: k as f64 / 2.0,
                k,
            });
        }
        Ok(Self { spins })
    }

    pub fn from_values(values: &[f64]) -> Result<Self> {
        let spins = values.iter().map(|&j| Spin::from_f64(j)).collect::<Result<Vec<_>>>()?;
        Self::new(spins)
    }

    /// `K` spin-1/2 particles.
    pub fn qubits(k: usize) -> Result<Self> {
        Self::new(vec![Spin::from_twice(1); k])
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    /// Number of particles `N`.
    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    /// Twice the total spin; the number of measurement directions.
    pub fn k(&self) -> usize {
        self.spins.iter().map(|s| s.twice() as usize).sum()
    }

    pub fn local_dims(&self) -> Vec<usize> {
        self.spins.iter().map(|s| s.dim()).collect()
    }

    pub fn dim(&self) -> usize {
        self.local_dims().iter().product()
    }

    pub fn layout(&self) -> SlotLayout {
        SlotLayout::new(&self.local_dims()).expect("local dimensions are positive")
    }

    /// Sub-ensemble on the given particle indices, which need not have odd total.
    pub fn sub_dims(&self, particles: &[usize]) -> usize {
        particles.iter().map(|&p| self.spins[p].dim()).product()
    }

    /// Index of `⊗|j_n, j_n>` in the product basis.
    pub fn stretched_up_index(&self) -> usize {
        0
    }

    /// Index of `⊗|j_n, -j_n>` in the product basis.
    pub fn stretched_down_index(&self) -> usize {
        self.dim() - 1
    }
}

impl fmt::Display for SpinEnsemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.spins.iter().map(|s| s.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// `(J_x, J_y, J_z)` of a single spin-j from the ladder operators.
pub fn spin_matrices(j: Spin) -> (HermitianOperator, HermitianOperator, HermitianOperator) {
    let d = j.dim();
    let jv = j.value();
    let m_of = |i: usize| jv - i as f64;
    // <m+1| J+ |m> sits at (i-1, i) since index i carries m = j - i
    let mut jp = ComplexMatrix::zeros(d, d);
    for i in 1..d {
        let m = m_of(i);
        jp[(i - 1, i)] = Complex64::new((jv * (jv + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.adjoint();
    let jx = HermitianOperator::symmetrized((&jp + &jm).scale_real(0.5));
    let jy = HermitianOperator::symmetrized((&jp - &jm).scale(Complex64::new(0.0, -0.5)));
    let jz = HermitianOperator::from_real_diagonal(&(0..d).map(m_of).collect::<Vec<_>>());
    (jx, jy, jz)
}

/// Total angular momentum `J = sum_n J^(j_n)` on the full product space.
#[derive(Debug, Clone)]
pub struct CollectiveOperator {
    ensemble: SpinEnsemble,
    pub jx: HermitianOperator,
    pub jy: HermitianOperator,
    pub jz: HermitianOperator,
}

/// Embeds a local operator on `slot` as `1 ⊗ ... ⊗ op ⊗ ... ⊗ 1`.
fn embed(op: &ComplexMatrix, dims: &[usize], slot: usize) -> ComplexMatrix {
    let left: usize = dims[..slot].iter().product();
    let right: usize = dims[slot + 1..].iter().product();
    kron(
        &kron(&ComplexMatrix::identity(left), op),
        &ComplexMatrix::identity(right),
    )
}

/// Sum of local spin operators over `particles` of a register with local
/// dimensions given by the spins. Operates on the sub-register spanned by
/// `particles` (ascending), which may have any total spin.
pub fn collective_components(spins: &[Spin]) -> [HermitianOperator; 3] {
    let dims: Vec<usize> = spins.iter().map(|s| s.dim()).collect();
    let n: usize = dims.iter().product();
    let mut acc = [
        ComplexMatrix::zeros(n, n),
        ComplexMatrix::zeros(n, n),
        ComplexMatrix::zeros(n, n),
    ];
    for (slot, &s) in spins.iter().enumerate() {
        let (x, y, z) = spin_matrices(s);
        for (a, local) in acc.iter_mut().zip([x, y, z]) {
            *a = &*a + &embed(local.matrix(), &dims, slot);
        }
    }
    acc.map(HermitianOperator::symmetrized)
}

impl CollectiveOperator {
    pub fn new(ensemble: &SpinEnsemble) -> Self {
        let [jx, jy, jz] = collective_components(ensemble.spins());
        Self {
            ensemble: ensemble.clone(),
            jx,
            jy,
            jz,
        }
    }

    pub fn ensemble(&self) -> &SpinEnsemble {
        &self.ensemble
    }

    /// `J_k = cos(2 pi k/K + theta) J_x + sin(2 pi k/K + theta) J_y`.
    pub fn direction(&self, k: usize, theta_offset: f64) -> Result<HermitianOperator> {
        let kk = self.ensemble.k();
        if k >= kk {
            return Err(Error::OutOfRange { index: k, bound: kk });
        }
        let angle = direction_angle(k, kk, theta_offset);
        Ok(self.jx.combine(angle.cos(), &self.jy, angle.sin()))
    }
}

/// In-plane angle of direction `k` out of `K`.
pub fn direction_angle(k: usize, kk: usize, theta_offset: f64) -> f64 {
    2.0 * PI * k as f64 / kk as f64 + theta_offset
}

/// `U op U^H` with `U = exp(-i angle Jz)`.
pub fn rotate_about_z(op: &HermitianOperator, jz: &HermitianOperator, angle: f64) -> Result<HermitianOperator> {
    require_same_dim(op.dim(), jz.dim(), "rotate_about_z")?;
    let u = hermitian_eigendecompose(jz).exp_minus_i(angle);
    op.conjugate_by(&u)
}

/// `exp(-i angle G)` for a Hermitian generator `G`.
pub fn rotation(generator: &HermitianOperator, angle: f64) -> ComplexMatrix {
    hermitian_eigendecompose(generator).exp_minus_i(angle)
}
