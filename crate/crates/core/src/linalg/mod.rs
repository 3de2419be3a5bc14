//! Dense complex linear algebra and exact combinatorics.

mod eigen;
mod exact;
mod matrix;
mod tensor;

pub(crate) use eigen::require_same_dim;
pub use eigen::{
    eigendecompose_checked, eigenvalues, hermitian_eigendecompose, spectral_function, EigenDecomposition,
    SpectralCluster, CLUSTER_TOL,
};
pub use exact::{binomial_exact, ExactRational};
pub(crate) use matrix::ZERO;
pub use matrix::{basis_vector, inner, norm, normalized, ComplexMatrix, HermitianOperator, HERMITIAN_TOL};
pub use tensor::{
    contract_rest_with_ket, insert_slot, kron, kron_vec, partial_trace, tensor_over_groups, tensor_vec_over_groups,
    SlotLayout,
};
