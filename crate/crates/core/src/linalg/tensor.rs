//! Tensor-product bookkeeping on a register of slots with fixed local
//! dimensions. Slot 0 is the most significant digit of the product index.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * br, a.cols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Mixed-radix layout of a multi-slot Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotLayout {
    dims: Vec<usize>,
    strides: Vec<usize>,
}

impl SlotLayout {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!("invalid slot dimensions {dims:?}")));
        }
        let mut strides = vec![1; dims.len()];
        for s in (0..dims.len() - 1).rev() {
            strides[s] = strides[s + 1] * dims[s + 1];
        }
        Ok(Self {
            dims: dims.to_vec(),
            strides,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn slots(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn digit(&self, index: usize, slot: usize) -> usize {
        (index / self.strides[slot]) % self.dims[slot]
    }

    /// Dimension of the space spanned by `subset`.
    pub fn subset_dim(&self, subset: &[usize]) -> usize {
        subset.iter().map(|&s| self.dims[s]).product()
    }

    /// Index of the digits of `index` restricted to `subset` (in the given slot
    /// order, first slot most significant).
    pub fn sub_index(&self, index: usize, subset: &[usize]) -> usize {
        subset
            .iter()
            .fold(0, |acc, &s| acc * self.dims[s] + self.digit(index, s))
    }

    /// Validates a slot subset: sorted, unique, in range.
    pub fn check_subset(&self, subset: &[usize]) -> Result<()> {
        if subset.iter().any(|&s| s >= self.slots()) || subset.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPartition(format!(
                "slot set {subset:?} must be strictly increasing within 0..{}",
                self.slots()
            )));
        }
        Ok(())
    }

    pub fn complement(&self, subset: &[usize]) -> Vec<usize> {
        (0..self.slots()).filter(|s| !subset.contains(s)).collect()
    }

    /// `table[a][b]` = full index whose digits on `keep` spell `a` and on the
    /// complement spell `b`.
    pub fn split_table(&self, keep: &[usize]) -> Vec<Vec<usize>> {
        let rest = self.complement(keep);
        let (da, db) = (self.subset_dim(keep), self.subset_dim(&rest));
        let mut table = vec![vec![0; db]; da];
        for i in 0..self.total_dim() {
            table[self.sub_index(i, keep)][self.sub_index(i, &rest)] = i;
        }
        table
    }
}

fn check_square_layout(op: &ComplexMatrix, layout: &SlotLayout) -> Result<()> {
    if !op.is_square() || op.rows() != layout.total_dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but slot dimensions {:?} multiply to {}",
            op.rows(),
            op.cols(),
            layout.dims(),
            layout.total_dim()
        )));
    }
    Ok(())
}

/// Reduced operator on the `keep` slots (ascending); every other slot is traced out.
pub fn partial_trace(op: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let layout = SlotLayout::new(dims)?;
    check_square_layout(op, &layout)?;
    layout.check_subset(keep)?;
    if keep.is_empty() || keep.len() == layout.slots() {
        return Err(Error::InvalidPartition(format!(
            "kept slots {keep:?} must be a nonempty proper subset of {} slots",
            layout.slots()
        )));
    }
    let table = layout.split_table(keep);
    let da = table.len();
    Ok(ComplexMatrix::from_fn(da, da, |a, ap| {
        table[a].iter().zip(&table[ap]).map(|(&i, &j)| op[(i, j)]).sum()
    }))
}

/// `(1_keep ⊗ <psi|) op (1_keep ⊗ |psi>)` where `psi` lives on the complement of
/// `keep` (ascending slot order). Equals `tr_rest[op (1 ⊗ |psi><psi|)]`.
pub fn contract_rest_with_ket(
    op: &ComplexMatrix,
    dims: &[usize],
    keep: &[usize],
    psi_rest: &[Complex64],
) -> Result<ComplexMatrix> {
    let layout = SlotLayout::new(dims)?;
    check_square_layout(op, &layout)?;
    layout.check_subset(keep)?;
    let rest = layout.complement(keep);
    if psi_rest.len() != layout.subset_dim(&rest) {
        return Err(Error::DimensionMismatch(format!(
            "ket of length {} on slots {rest:?} of dimension {}",
            psi_rest.len(),
            layout.subset_dim(&rest)
        )));
    }
    let table = layout.split_table(keep);
    let da = table.len();
    let mut out = ComplexMatrix::zeros(da, da);
    for a in 0..da {
        for ap in 0..da {
            let mut acc = ZERO;
            for (b, &i) in table[a].iter().enumerate() {
                let cb = psi_rest[b].conj();
                if cb == ZERO {
                    continue;
                }
                let mut row = ZERO;
                for (bp, &j) in table[ap].iter().enumerate() {
                    row += op[(i, j)] * psi_rest[bp];
                }
                acc += cb * row;
            }
            out[(a, ap)] = acc;
        }
    }
    Ok(out)
}

/// Inverse bookkeeping of a single-slot partial trace: returns
/// `(local ⊗ reduced)` with `local` placed on `slot` and `reduced` acting on
/// the remaining slots in ascending order.
pub fn insert_slot(
    reduced: &ComplexMatrix,
    local: &ComplexMatrix,
    dims: &[usize],
    slot: usize,
) -> Result<ComplexMatrix> {
    let layout = SlotLayout::new(dims)?;
    if slot >= layout.slots() {
        return Err(Error::OutOfRange {
            index: slot,
            bound: layout.slots(),
        });
    }
    let rest = layout.complement(&[slot]);
    if reduced.rows() != layout.subset_dim(&rest) || local.rows() != dims[slot] {
        return Err(Error::DimensionMismatch("insert_slot operand shapes".into()));
    }
    let n = layout.total_dim();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        let l = local[(layout.digit(i, slot), layout.digit(j, slot))];
        if l == ZERO {
            return ZERO;
        }
        l * reduced[(layout.sub_index(i, &rest), layout.sub_index(j, &rest))]
    }))
}

/// Tensor product of per-group operators, where `groups` partition the slots
/// and each factor acts on its group's slots in ascending order.
pub fn tensor_over_groups(factors: &[ComplexMatrix], groups: &[Vec<usize>], dims: &[usize]) -> Result<ComplexMatrix> {
    let layout = SlotLayout::new(dims)?;
    check_groups(&layout, groups)?;
    if factors.len() != groups.len() {
        return Err(Error::DimensionMismatch("one factor per group required".into()));
    }
    for (f, g) in factors.iter().zip(groups) {
        let d = layout.subset_dim(g);
        if f.rows() != d || f.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "factor for slots {g:?} must be {d}x{d}"
            )));
        }
    }
    let n = layout.total_dim();
    let sub: Vec<Vec<usize>> = groups
        .iter()
        .map(|g| (0..n).map(|i| layout.sub_index(i, g)).collect())
        .collect();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        let mut acc = Complex64::new(1.0, 0.0);
        for (f, s) in factors.iter().zip(&sub) {
            acc *= f[(s[i], s[j])];
            if acc == ZERO {
                break;
            }
        }
        acc
    }))
}

/// Vector analogue of [`tensor_over_groups`].
pub fn tensor_vec_over_groups(
    factors: &[Vec<Complex64>],
    groups: &[Vec<usize>],
    dims: &[usize],
) -> Result<Vec<Complex64>> {
    let layout = SlotLayout::new(dims)?;
    check_groups(&layout, groups)?;
    if factors.len() != groups.len() {
        return Err(Error::DimensionMismatch("one factor per group required".into()));
    }
    for (f, g) in factors.iter().zip(groups) {
        if f.len() != layout.subset_dim(g) {
            return Err(Error::DimensionMismatch(format!(
                "factor for slots {g:?} must have length {}",
                layout.subset_dim(g)
            )));
        }
    }
    Ok((0..layout.total_dim())
        .map(|i| {
            factors
                .iter()
                .zip(groups)
                .map(|(f, g)| f[layout.sub_index(i, g)])
                .product()
        })
        .collect())
}

fn check_groups(layout: &SlotLayout, groups: &[Vec<usize>]) -> Result<()> {
    let mut seen = vec![false; layout.slots()];
    for g in groups {
        layout.check_subset(g)?;
        if g.is_empty() {
            return Err(Error::InvalidPartition("empty group".into()));
        }
        for &s in g {
            if seen[s] {
                return Err(Error::InvalidPartition(format!("slot {s} appears twice")));
            }
            seen[s] = true;
        }
    }
    if seen.iter().any(|x| !x) {
        return Err(Error::InvalidPartition("groups do not cover every slot".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigenvalues, HermitianOperator};

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn diag(v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(v)
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        assert_eq!(
            kron(&diag(&[1.0, 0.0]), &diag(&[1.0, 0.0])),
            diag(&[1.0, 0.0, 0.0, 0.0])
        );
    }

    #[test]
    fn two_spin_jz_spectrum() {
        let sz = diag(&[0.5, -0.5]);
        let i2 = ComplexMatrix::identity(2);
        let jz = &kron(&sz, &i2) + &kron(&i2, &sz);
        let ev = eigenvalues(&HermitianOperator::new(jz).unwrap());
        assert_eq!(ev, vec![-1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn trace_of_product_projector() {
        let p00 = diag(&[1.0, 0.0, 0.0, 0.0]);
        let red = partial_trace(&p00, &[2, 2], &[1]).unwrap();
        assert_eq!(red, diag(&[1.0, 0.0]));
    }

    #[test]
    fn bell_reduces_to_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = vec![r(s), r(0.0), r(0.0), r(s)];
        let rho = ComplexMatrix::outer(&bell, &bell);
        for keep in [[0], [1]] {
            let red = partial_trace(&rho, &[2, 2], &keep).unwrap();
            assert!(red.max_abs_diff(&diag(&[0.5, 0.5])) < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let m = ComplexMatrix::identity(6);
        assert!(partial_trace(&m, &[2, 2], &[0]).is_err());
        assert!(partial_trace(&m, &[2, 3], &[0, 1]).is_err());
        assert!(partial_trace(&m, &[2, 3], &[]).is_err());
        assert!(partial_trace(&m, &[2, 3], &[2]).is_err());
    }

    #[test]
    fn non_contiguous_kron_matches_permuted_product() {
        // groups {0,2} and {1}: A acts on slots 0,2 and B on slot 1
        let a = ComplexMatrix::from_fn(4, 4, |i, j| Complex64::new((i * 4 + j) as f64, 0.0));
        let b = ComplexMatrix::from_fn(2, 2, |i, j| Complex64::new(0.0, (1 + i + 2 * j) as f64));
        let full = tensor_over_groups(&[a.clone(), b.clone()], &[vec![0, 2], vec![1]], &[2, 2, 2]).unwrap();
        let layout = SlotLayout::new(&[2, 2, 2]).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let ai = layout.sub_index(i, &[0, 2]);
                let aj = layout.sub_index(j, &[0, 2]);
                let bi = layout.digit(i, 1);
                let bj = layout.digit(j, 1);
                assert_eq!(full[(i, j)], a[(ai, aj)] * b[(bi, bj)]);
            }
        }
        let contiguous = tensor_over_groups(&[b.clone(), a.clone()], &[vec![0], vec![1, 2]], &[2, 2, 2]).unwrap();
        assert_eq!(contiguous, kron(&b, &a));
    }

    #[test]
    fn insert_slot_inverts_trace_of_product() {
        let local = diag(&[0.25, 0.75]);
        let reduced = ComplexMatrix::from_fn(4, 4, |i, j| Complex64::new(i as f64, j as f64));
        let full = insert_slot(&reduced, &local, &[2, 2, 2], 1).unwrap();
        let back = partial_trace(&full, &[2, 2, 2], &[0, 2]).unwrap();
        assert!(back.max_abs_diff(&reduced) < 1e-14);
    }
}
