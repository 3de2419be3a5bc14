//! Numerical maximization of the witness score over product states across a
//! bipartition, used to check the analytic separable bound.
//!
//! The see-saw alternates between the two sides: with one side's ket fixed,
//! the best ket on the other side is the top eigenvector of the conditioned
//! operator `tr_rest[Q (1 ⊗ |psi><psi|)]`. Every step can only increase the
//! score, so the final value is a certified lower bound on the bipartition
//! maximum.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    basis_vector, contract_rest_with_ket, hermitian_eigendecompose, inner, normalized, HermitianOperator,
};
use crate::spin::{Spin, SpinEnsemble};
use crate::states::random_unit_vector;
use crate::witness::WitnessOperator;

/// Split of the particles into `subset` (always containing particle 0) and
/// its complement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bipartition {
    pub subset: Vec<usize>,
    pub complement: Vec<usize>,
    /// Total spin of `subset`.
    pub j_tilde: Spin,
    /// Total spin of the complement.
    pub j_tilde_prime: Spin,
}

impl Bipartition {
    pub fn new(ensemble: &SpinEnsemble, subset: &[usize]) -> Result<Self> {
        let n = ensemble.len();
        let mut subset = subset.to_vec();
        subset.sort_unstable();
        subset.dedup();
        if subset.is_empty() || subset.len() >= n || subset.iter().any(|&p| p >= n) {
            return Err(Error::InvalidPartition(format!(
                "{subset:?} is not a nonempty proper subset of {n} particles"
            )));
        }
        let complement: Vec<usize> = (0..n).filter(|p| !subset.contains(p)).collect();
        let twice = |ps: &[usize]| ps.iter().map(|&p| ensemble.spins()[p].twice()).sum::<u32>();
        if twice(&subset) == 0 || twice(&complement) == 0 {
            return Err(Error::InvalidPartition(format!(
                "{subset:?} leaves one side with only spin-0 particles"
            )));
        }
        Ok(Self {
            j_tilde: Spin::from_twice(twice(&subset)),
            j_tilde_prime: Spin::from_twice(twice(&complement)),
            subset,
            complement,
        })
    }

    pub fn label(&self) -> String {
        let fmt = |ps: &[usize]| ps.iter().map(|p| (p + 1).to_string()).collect::<Vec<_>>().join(",");
        format!("{{{}|{}}}", fmt(&self.subset), fmt(&self.complement))
    }
}

/// All `2^(N-1) - 1` unordered bipartitions, particle 0 always in `subset`.
/// Splits that leave one side with only spin-0 particles are skipped.
pub fn enumerate_bipartitions(ensemble: &SpinEnsemble) -> Result<Vec<Bipartition>> {
    let n = ensemble.len();
    if n < 2 {
        return Err(Error::InvalidPartition(
            "bipartitions need at least two particles".into(),
        ));
    }
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << (n - 1)) {
        let mut subset = vec![0];
        subset.extend((1..n).filter(|&p| mask & (1 << (p - 1)) != 0));
        if subset.len() < n {
            if let Ok(b) = Bipartition::new(ensemble, &subset) {
                out.push(b);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidPartition(
            "bipartitions need two particles with nonzero spin".into(),
        ));
    }
    Ok(out)
}

/// `(1 ⊗ <psi|) Q (1 ⊗ |psi>)` on `keep`, with `psi` on the other side.
fn conditioned(q: &WitnessOperator, keep: &[usize], psi_other: &[Complex64]) -> Result<HermitianOperator> {
    let dims = q.ensemble().local_dims();
    let m = contract_rest_with_ket(q.operator().matrix(), &dims, keep, psi_other)?;
    Ok(HermitianOperator::symmetrized(m))
}

/// Reduced operator on the `subset` side given a ket on the complement.
pub fn conditioned_operator(
    q: &WitnessOperator,
    bipartition: &Bipartition,
    psi_complement: &[Complex64],
) -> Result<HermitianOperator> {
    conditioned(q, &bipartition.subset, psi_complement)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeeSawConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SeeSawConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 200,
            tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeeSawResult {
    pub bipartition: Bipartition,
    pub best_value: f64,
    #[serde(skip)]
    pub best_kets: (Vec<Complex64>, Vec<Complex64>),
    /// Half-steps taken by the best restart.
    pub iterations: usize,
    pub restarts_used: usize,
    pub converged: bool,
    /// Whether every restart produced a nondecreasing value sequence.
    pub monotone: bool,
    /// Value after each half-step of restart 0 (stretched-state seed).
    pub seeded_history: Vec<f64>,
}

/// Monotonicity slack for floating-point noise in the eigen-solves.
const MONOTONE_SLACK: f64 = 1e-12;

/// Top eigenpair, choosing within a degenerate top eigenspace the unit
/// vector closest to `previous`.
fn top_eigen(op: &HermitianOperator, previous: &[Complex64]) -> (f64, Vec<Complex64>) {
    let evd = hermitian_eigendecompose(op);
    let clusters = evd.clusters();
    let top = clusters.last().expect("nonempty spectrum");
    if top.columns.len() == 1 {
        return (top.value, evd.vector(top.columns.start));
    }
    let p = evd.projector(top);
    let projected = p.matrix().mul_vec(previous).expect("dims agree");
    let v = normalized(&projected)
        .filter(|v| inner(v, v).re > 0.5)
        .unwrap_or_else(|| evd.vector(top.columns.start));
    (top.value, v)
}

struct RestartOutcome {
    value: f64,
    kets: (Vec<Complex64>, Vec<Complex64>),
    iterations: usize,
    converged: bool,
    monotone: bool,
    history: Vec<f64>,
}

fn run_restart(
    q: &WitnessOperator,
    bip: &Bipartition,
    init_b: Vec<Complex64>,
    max_iters: usize,
    tol: f64,
) -> Result<RestartOutcome> {
    let ensemble = q.ensemble();
    let da = ensemble.sub_dims(&bip.subset);
    let mut psi_a = basis_vector(da, 0);
    let mut psi_b = init_b;
    let mut history = Vec::new();
    let mut value = f64::NEG_INFINITY;
    let mut monotone = true;
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..max_iters {
        let (va, a) = top_eigen(&conditioned(q, &bip.subset, &psi_b)?, &psi_a);
        psi_a = a;
        let (vb, b) = top_eigen(&conditioned(q, &bip.complement, &psi_a)?, &psi_b);
        psi_b = b;
        iterations += 1;
        for v in [va, vb] {
            if v < value - MONOTONE_SLACK {
                monotone = false;
            }
            history.push(v);
        }
        let improvement = vb - value;
        value = value.max(vb);
        if improvement.abs() < tol {
            converged = true;
            break;
        }
    }
    Ok(RestartOutcome {
        value,
        kets: (psi_a, psi_b),
        iterations,
        converged,
        monotone,
        history,
    })
}

/// `(|up> + |down>)/sqrt(2)` on a side of dimension `d`. A single stretched
/// state conditions `Q` down to `1/2` times the identity, a stationary point of
/// the see-saw; the equal superposition is where the bound is attained.
fn stretched_superposition(d: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); d];
    v[0] += std::f64::consts::FRAC_1_SQRT_2;
    v[d - 1] += std::f64::consts::FRAC_1_SQRT_2;
    v
}

/// Best product-state score across one bipartition. Restart 0 starts from the
/// equal superposition of the complement's stretched states; restart `r > 0` draws its complement ket from a
/// `ChaCha8Rng` seeded with `seed` on stream `r`.
pub fn seesaw_maximize(q: &WitnessOperator, bipartition: &Bipartition, config: &SeeSawConfig) -> Result<SeeSawResult> {
    if config.restarts == 0 || config.tol <= 0.0 || config.max_iters == 0 {
        return Err(Error::InvalidArgument(
            "see-saw needs restarts >= 1, max_iters >= 1 and tol > 0".into(),
        ));
    }
    let db = q.ensemble().sub_dims(&bipartition.complement);
    let mut best: Option<RestartOutcome> = None;
    let mut monotone = true;
    let mut seeded_history = Vec::new();
    for r in 0..config.restarts {
        let init = if r == 0 {
            stretched_superposition(db)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(r as u64);
            random_unit_vector(db, &mut rng)
        };
        let out = run_restart(q, bipartition, init, config.max_iters, config.tol)?;
        monotone &= out.monotone;
        if r == 0 {
            seeded_history = out.history.clone();
        }
        if best.as_ref().is_none_or(|b| out.value > b.value) {
            best = Some(out);
        }
    }
    let best = best.expect("at least one restart");
    Ok(SeeSawResult {
        bipartition: bipartition.clone(),
        best_value: best.value,
        best_kets: best.kets,
        iterations: best.iterations,
        restarts_used: config.restarts,
        converged: best.converged,
        monotone,
        seeded_history,
    })
}

/// Runs the see-saw on every bipartition.
pub fn seesaw_all(q: &WitnessOperator, config: &SeeSawConfig) -> Result<Vec<SeeSawResult>> {
    enumerate_bipartitions(q.ensemble())?
        .iter()
        .map(|b| seesaw_maximize(q, b, config))
        .collect()
}

/// Nested grid over unit vectors of dimension `d` in hyperspherical
/// coordinates: `d - 1` polar angles in `[0, pi/2]` with `resolution + 1`
/// points and `d - 1` phases in `[0, 2 pi)` with `resolution` points.
fn ket_grid(d: usize, resolution: usize) -> Vec<Vec<Complex64>> {
    let polar: Vec<f64> = (0..=resolution)
        .map(|i| 0.5 * PI * i as f64 / resolution as f64)
        .collect();
    let phase: Vec<f64> = (0..resolution)
        .map(|i| 2.0 * PI * i as f64 / resolution as f64)
        .collect();
    let params = d - 1;
    let mut out = Vec::new();
    let mut idx = vec![0usize; 2 * params];
    loop {
        let mut v = Vec::with_capacity(d);
        let mut tail = 1.0;
        for c in 0..d {
            let amp = if c < params { tail * polar[idx[c]].cos() } else { tail };
            if c < params {
                tail *= polar[idx[c]].sin();
            }
            let ph = if c == 0 { 0.0 } else { phase[idx[params + c - 1]] };
            v.push(Complex64::from_polar(amp, ph));
        }
        out.push(v);
        // odometer
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return out;
            }
            let limit = if pos < params { polar.len() } else { phase.len() };
            idx[pos] += 1;
            if idx[pos] < limit {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Largest dimension swept by [`grid_certify`] on either side.
pub const GRID_MAX_SIDE_DIM: usize = 4;

/// Grid sweep over the smaller side of the bipartition, maximizing exactly
/// over the other side for each grid ket. Never exceeds the true maximum;
/// grids at resolution `r` are contained in those at `2r`.
pub fn grid_certify(q: &WitnessOperator, bipartition: &Bipartition, resolution: usize) -> Result<f64> {
    if resolution == 0 {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    let e = q.ensemble();
    let da = e.sub_dims(&bipartition.subset);
    let db = e.sub_dims(&bipartition.complement);
    if da > GRID_MAX_SIDE_DIM || db > GRID_MAX_SIDE_DIM {
        return Err(Error::InvalidArgument(format!(
            "grid sweep needs side dimensions <= {GRID_MAX_SIDE_DIM}, got {da} and {db}"
        )));
    }
    let (grid_side, exact_side, d) = if da <= db {
        (&bipartition.subset, &bipartition.complement, da)
    } else {
        (&bipartition.complement, &bipartition.subset, db)
    };
    let _ = grid_side;
    let mut best = f64::NEG_INFINITY;
    for ket in ket_grid(d, resolution) {
        let m = conditioned(q, exact_side, &ket)?;
        let top = *crate::linalg::eigenvalues(&m).last().expect("nonempty");
        best = best.max(top);
    }
    Ok(best)
}
