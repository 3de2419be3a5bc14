use faer::Side;
use num_complex::Complex64;

use super::matrix::{ComplexMatrix, HermitianOperator};
use crate::error::{Error, Result};

/// Eigenvalues closer than this are one degenerate cluster when building
/// spectral projectors.
pub const CLUSTER_TOL: f64 = 1e-9;

/// Eigenpairs of a Hermitian operator; eigenvalues ascending, eigenvectors as
/// orthonormal columns in matching order.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

/// A maximal run of eigenvalues within [`CLUSTER_TOL`] of their neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCluster {
    pub value: f64,
    /// Column indices into [`EigenDecomposition::eigenvectors`].
    pub columns: std::ops::Range<usize>,
}

pub fn hermitian_eigendecompose(op: &HermitianOperator) -> EigenDecomposition {
    let m = op.matrix();
    let n = op.dim();
    if is_diagonal(m) {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re).then(a.cmp(&b)));
        let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
        let mut vecs = ComplexMatrix::zeros(n, n);
        for (col, &row) in order.iter().enumerate() {
            vecs[(row, col)] = Complex64::new(1.0, 0.0);
        }
        return EigenDecomposition {
            eigenvalues,
            eigenvectors: vecs,
        };
    }
    let evd = m
        .to_faer()
        .self_adjoint_eigen(Side::Lower)
        .expect("self-adjoint eigensolver did not converge");
    let s = evd.S().column_vector();
    let eigenvalues: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    debug_assert!(eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    EigenDecomposition {
        eigenvalues,
        eigenvectors: ComplexMatrix::from_faer(evd.U()),
    }
}

/// Validating entry point for raw matrices.
pub fn eigendecompose_checked(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    let op = HermitianOperator::new(m.clone())?;
    Ok(hermitian_eigendecompose(&op))
}

pub fn eigenvalues(op: &HermitianOperator) -> Vec<f64> {
    let m = op.matrix();
    if is_diagonal(m) {
        let mut v: Vec<f64> = (0..op.dim()).map(|i| m[(i, i)].re).collect();
        v.sort_by(f64::total_cmp);
        return v;
    }
    m.to_faer()
        .self_adjoint_eigenvalues(Side::Lower)
        .expect("self-adjoint eigensolver did not converge")
}

fn is_diagonal(m: &ComplexMatrix) -> bool {
    let n = m.rows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == Complex64::new(0.0, 0.0)))
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, col: usize) -> Vec<Complex64> {
        self.eigenvectors.column(col)
    }

    pub fn clusters(&self) -> Vec<SpectralCluster> {
        let mut out: Vec<SpectralCluster> = Vec::new();
        let mut start = 0;
        for i in 1..=self.dim() {
            if i == self.dim() || self.eigenvalues[i] - self.eigenvalues[i - 1] >= CLUSTER_TOL {
                let slice = &self.eigenvalues[start..i];
                let value = slice.iter().sum::<f64>() / slice.len() as f64;
                out.push(SpectralCluster {
                    value,
                    columns: start..i,
                });
                start = i;
            }
        }
        out
    }

    /// `sum_c f(lambda_c) P_c` over degenerate clusters.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let mut weights = vec![0.0; self.dim()];
        for c in self.clusters() {
            let w = f(c.value);
            for col in c.columns {
                weights[col] = w;
            }
        }
        self.reconstruct_with(&weights)
    }

    /// `V diag(w) V^H`
    pub fn reconstruct_with(&self, weights: &[f64]) -> HermitianOperator {
        let n = self.dim();
        let v = &self.eigenvectors;
        let scaled = ComplexMatrix::from_fn(n, n, |i, j| v[(i, j)] * weights[j]);
        HermitianOperator::symmetrized(&scaled * &v.adjoint())
    }

    pub fn reconstruct(&self) -> HermitianOperator {
        self.reconstruct_with(&self.eigenvalues)
    }

    /// `exp(-i t A) = V diag(exp(-i t lambda)) V^H`
    pub fn exp_minus_i(&self, t: f64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&l| Complex64::from_polar(1.0, -t * l))
            .collect();
        let scaled = ComplexMatrix::from_fn(n, n, |i, j| v[(i, j)] * phases[j]);
        &scaled * &v.adjoint()
    }

    /// Projector onto a cluster's eigenspace.
    pub fn projector(&self, cluster: &SpectralCluster) -> HermitianOperator {
        let weights: Vec<f64> = (0..self.dim())
            .map(|i| if cluster.columns.contains(&i) { 1.0 } else { 0.0 })
            .collect();
        self.reconstruct_with(&weights)
    }

    /// `max |V^H V - I|`
    pub fn orthonormality_defect(&self) -> f64 {
        let v = &self.eigenvectors;
        let gram = &v.adjoint() * v;
        gram.max_abs_diff(&ComplexMatrix::identity(self.dim()))
    }
}

/// Spectral function of a Hermitian operator.
pub fn spectral_function(op: &HermitianOperator, f: impl Fn(f64) -> f64) -> HermitianOperator {
    hermitian_eigendecompose(op).apply(f)
}

pub(crate) fn require_same_dim(a: usize, b: usize, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!("{what}: {a} vs {b}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;

    fn pauli_x_half() -> HermitianOperator {
        let h = Complex64::new(0.5, 0.0);
        let z = Complex64::new(0.0, 0.0);
        HermitianOperator::new(ComplexMatrix::from_row_major(2, 2, vec![z, h, h, z]).unwrap()).unwrap()
    }

    #[test]
    fn two_level_spectrum() {
        let e = hermitian_eigendecompose(&pauli_x_half());
        assert!((e.eigenvalues[0] + 0.5).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 0.5).abs() < 1e-14);
        assert!(e.reconstruct().matrix().max_abs_diff(pauli_x_half().matrix()) < 1e-14);
    }

    #[test]
    fn identity_is_one_cluster() {
        let e = hermitian_eigendecompose(&HermitianOperator::identity(4));
        assert_eq!(e.eigenvalues, vec![1.0; 4]);
        let clusters = e.clusters();
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].columns, 0..4);
        assert!(e.orthonormality_defect() < 1e-14);
    }

    #[test]
    fn checked_entry_rejects_non_hermitian() {
        let m = ComplexMatrix::from_fn(3, 3, |i, j| Complex64::new((i + 2 * j) as f64, 0.0));
        assert!(matches!(eigendecompose_checked(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn degenerate_projector_is_basis_independent() {
        // diag(1, 1, 2) rotated in the degenerate block
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = |x: f64| Complex64::new(x, 0.0);
        let u = ComplexMatrix::from_row_major(
            3,
            3,
            vec![c(s), c(-s), c(0.0), c(s), c(s), c(0.0), c(0.0), c(0.0), c(1.0)],
        )
        .unwrap();
        let op = HermitianOperator::from_real_diagonal(&[1.0, 1.0, 2.0])
            .conjugate_by(&u)
            .unwrap();
        let e = hermitian_eigendecompose(&op);
        let clusters = e.clusters();
        assert_eq!(clusters.len(), 2);
        let p = e.projector(&clusters[0]);
        let expected = HermitianOperator::from_real_diagonal(&[1.0, 1.0, 0.0]);
        assert!(p.matrix().max_abs_diff(expected.matrix()) < 1e-12);
    }
}
