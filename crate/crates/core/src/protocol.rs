//! Monte-Carlo simulation of the measurement protocol: draw a direction `k`,
//! measure the sign of `J_k`, repeat, and estimate the positive-outcome
//! probability with a Wilson interval.
//!
//! Round `i` draws all of its randomness from `ChaCha8Rng::seed_from_u64(seed)`
//! on stream `i`, so any subset of rounds can be replayed independently.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigendecompose, tensor_over_groups, HermitianOperator};
use crate::spin::{collective_components, direction_angle, rotate_about_z, CollectiveOperator, SpinEnsemble};
use crate::states::QuantumState;
use crate::witness::{pos_operator, witness_report, ZERO_EIGENVALUE_TOL};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959963984540054;

#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub state: QuantumState,
    pub theta_offset: f64,
    pub rounds: u64,
    pub seed: u64,
    /// Partition of the particles measured separately, each group ascending.
    pub subensembles: Option<Vec<Vec<usize>>>,
    /// Precession frequency; only used to report the measurement times.
    pub omega: Option<f64>,
    /// Equal trials per direction (`k = i mod K`) instead of uniform draws.
    /// Not part of the literal protocol.
    pub stratified: bool,
}

impl ProtocolConfig {
    pub fn new(state: QuantumState, rounds: u64, seed: u64) -> Self {
        Self {
            state,
            theta_offset: 0.0,
            rounds,
            seed,
            subensembles: None,
            omega: None,
            stratified: false,
        }
    }

    pub fn ensemble(&self) -> &SpinEnsemble {
        self.state.ensemble()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    GmeDetected,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::GmeDetected => "GME-detected",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KCount {
    pub positives: u64,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolEstimate {
    pub p_hat: f64,
    pub rounds: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub per_k_counts: Vec<KCount>,
    pub p_sep: f64,
    pub verdict: Verdict,
    /// Measurement times `t_k` when a precession frequency was given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
}

impl ProtocolEstimate {
    pub fn positives(&self) -> u64 {
        self.per_k_counts.iter().map(|c| c.positives).sum()
    }
}

/// Wilson score interval for `positives` successes in `n` trials.
pub fn wilson_interval(positives: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = positives as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn round_rng(seed: u64, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round);
    rng
}

fn draw_k(rng: &mut ChaCha8Rng, round: u64, kk: usize, stratified: bool) -> usize {
    if stratified {
        (round % kk as u64) as usize
    } else {
        rng.random_range(0..kk)
    }
}

fn check_rounds(config: &ProtocolConfig) -> Result<()> {
    if config.rounds == 0 {
        return Err(Error::InvalidArgument("rounds must be positive".into()));
    }
    Ok(())
}

fn finish(config: &ProtocolConfig, per_k: Vec<KCount>) -> Result<ProtocolEstimate> {
    let kk = config.ensemble().k();
    let positives: u64 = per_k.iter().map(|c| c.positives).sum();
    let (ci_low, ci_high) = wilson_interval(positives, config.rounds, Z_95);
    let p_sep = witness_report(kk as i64)?.p_sep.value;
    let times = config.omega.map(|w| time_schedule(kk, w)).transpose()?;
    Ok(ProtocolEstimate {
        p_hat: positives as f64 / config.rounds as f64,
        rounds: config.rounds,
        ci_low,
        ci_high,
        per_k_counts: per_k,
        p_sep,
        verdict: if ci_low > p_sep {
            Verdict::GmeDetected
        } else {
            Verdict::Inconclusive
        },
        times,
    })
}

/// Exact positive-outcome probability `tr(rho pos(J_k))` for every `k`.
pub fn per_k_probabilities(state: &QuantumState, theta_offset: f64) -> Result<Vec<f64>> {
    let j = CollectiveOperator::new(state.ensemble());
    (0..state.ensemble().k())
        .map(|k| state.expectation(&pos_operator(&j.direction(k, theta_offset)?)))
        .collect()
}

/// Monolithic protocol: each round is a Bernoulli draw with the exact
/// probability of a positive `J_k` outcome.
pub fn run_protocol(config: &ProtocolConfig) -> Result<ProtocolEstimate> {
    check_rounds(config)?;
    if config.subensembles.is_some() {
        return run_protocol_subensembles(config);
    }
    let kk = config.ensemble().k();
    let q = per_k_probabilities(&config.state, config.theta_offset)?;
    let mut per_k = vec![
        KCount {
            positives: 0,
            trials: 0
        };
        kk
    ];
    for round in 0..config.rounds {
        let mut rng = round_rng(config.seed, round);
        let k = draw_k(&mut rng, round, kk, config.stratified);
        let u: f64 = rng.random();
        per_k[k].trials += 1;
        if u < q[k] {
            per_k[k].positives += 1;
        }
    }
    finish(config, per_k)
}

/// Joint outcome distribution of the subensemble observables for one `k`:
/// `(probability, summed eigenvalue)` per product eigenvector.
fn joint_outcomes(state: &QuantumState, groups: &[Vec<usize>], k: usize, theta_offset: f64) -> Result<Vec<(f64, f64)>> {
    let ensemble = state.ensemble();
    let dims = ensemble.local_dims();
    let angle = direction_angle(k, ensemble.k(), theta_offset);
    let mut vectors = Vec::with_capacity(groups.len());
    let mut values = Vec::with_capacity(groups.len());
    for g in groups {
        let spins: Vec<_> = g.iter().map(|&p| ensemble.spins()[p]).collect();
        let [jx, jy, _] = collective_components(&spins);
        let evd = hermitian_eigendecompose(&jx.combine(angle.cos(), &jy, angle.sin()));
        values.push(evd.eigenvalues);
        vectors.push(evd.eigenvectors);
    }
    let u = tensor_over_groups(&vectors, groups, &dims)?;
    let rho = state.density_matrix();
    let rotated = &(&u.adjoint() * rho.matrix()) * &u;
    // Column `c` of `u` carries eigenvector `sub_index(c, g)` of each group.
    let layout = ensemble.layout();
    Ok((0..u.cols())
        .map(|c| {
            let sum = groups.iter().zip(&values).map(|(g, v)| v[layout.sub_index(c, g)]).sum();
            (rotated[(c, c)].re.max(0.0), sum)
        })
        .collect())
}

fn check_partition(ensemble: &SpinEnsemble, groups: &[Vec<usize>]) -> Result<()> {
    let mut seen = vec![false; ensemble.len()];
    for g in groups {
        if g.is_empty() || g.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPartition(format!(
                "group {g:?} must be nonempty and ascending"
            )));
        }
        for &p in g {
            if p >= ensemble.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidPartition(format!(
                    "particle {p} out of range or repeated"
                )));
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidPartition("subensembles must cover every particle".into()));
    }
    Ok(())
}

/// Protocol with each subensemble measured separately and the outcomes summed.
/// Outcomes are drawn from the full-state Born distribution over the product
/// of the subensemble eigenbases; a zero sum is settled by a fair coin.
pub fn run_protocol_subensembles(config: &ProtocolConfig) -> Result<ProtocolEstimate> {
    check_rounds(config)?;
    let groups = config
        .subensembles
        .as_ref()
        .ok_or_else(|| Error::InvalidPartition("no subensembles given".into()))?;
    check_partition(config.ensemble(), groups)?;
    let kk = config.ensemble().k();
    let tables = (0..kk)
        .map(|k| {
            let outcomes = joint_outcomes(&config.state, groups, k, config.theta_offset)?;
            let mut acc = 0.0;
            Ok(outcomes
                .into_iter()
                .map(|(p, s)| {
                    acc += p;
                    (acc, s)
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut per_k = vec![
        KCount {
            positives: 0,
            trials: 0
        };
        kk
    ];
    for round in 0..config.rounds {
        let mut rng = round_rng(config.seed, round);
        let k = draw_k(&mut rng, round, kk, config.stratified);
        let table = &tables[k];
        let total = table.last().map_or(1.0, |t| t.0);
        let u: f64 = rng.random::<f64>() * total;
        let idx = table.partition_point(|&(c, _)| c <= u).min(table.len() - 1);
        let sum = table[idx].1;
        let positive = if sum.abs() <= ZERO_EIGENVALUE_TOL {
            rng.random::<bool>()
        } else {
            sum > 0.0
        };
        per_k[k].trials += 1;
        per_k[k].positives += positive as u64;
    }
    finish(config, per_k)
}

/// Measurement times `t_k = (2 pi / omega) k / K`.
pub fn time_schedule(kk: usize, omega: f64) -> Result<Vec<f64>> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
    }
    if kk == 0 {
        return Err(Error::InvalidK(0));
    }
    Ok((0..kk).map(|k| 2.0 * PI / omega * k as f64 / kk as f64).collect())
}

/// `J_x` in the Heisenberg picture under `H = -omega J_z`:
/// `exp(-i omega t J_z) J_x exp(i omega t J_z)`.
pub fn heisenberg_jx(jx: &HermitianOperator, jz: &HermitianOperator, omega: f64, t: f64) -> Result<HermitianOperator> {
    rotate_about_z(jx, jz, omega * t)
}

/// Smallest round count whose Wilson 95% half-width at `P_sep + gap/2` is
/// below `margin * gap / 2`.
pub fn rounds_needed(kk: usize, margin: f64) -> Result<u64> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "margin must lie in (0, 1), got {margin}"
        )));
    }
    let report = witness_report(kk as i64)?;
    let gap = report.gap.value;
    let p = report.p_sep.value + gap / 2.0;
    let target = margin * gap / 2.0;
    let half_width = |n: u64| {
        let n = n as f64;
        let z2 = Z_95 * Z_95;
        Z_95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
    };
    let (mut lo, mut hi) = (1u64, 2u64);
    while half_width(hi) >= target {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if half_width(mid) < target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(if half_width(lo) < target { lo } else { hi })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square test that every row of a contingency table shares the
/// same column proportions. Rows and columns with zero total are dropped.
pub fn chi_square_homogeneity(table: &[Vec<u64>]) -> Result<ChiSquareTest> {
    let cols = table.first().map_or(0, Vec::len);
    if table.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch("ragged contingency table".into()));
    }
    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().sum::<u64>() > 0).collect();
    let col_tot: Vec<u64> = (0..cols).map(|c| rows.iter().map(|r| r[c]).sum()).collect();
    let live: Vec<usize> = (0..cols).filter(|&c| col_tot[c] > 0).collect();
    if rows.len() < 2 || live.len() < 2 {
        return Ok(ChiSquareTest {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
        });
    }
    let total: u64 = col_tot.iter().sum();
    let mut stat = 0.0;
    for r in &rows {
        let rt: u64 = r.iter().sum();
        for &c in &live {
            let expected = rt as f64 * col_tot[c] as f64 / total as f64;
            stat += (r[c] as f64 - expected).powi(2) / expected;
        }
    }
    let dof = (rows.len() - 1) * (live.len() - 1);
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(ChiSquareTest {
        statistic: stat,
        dof,
        p_value: 1.0 - dist.cdf(stat),
    })
}

/// Homogeneity of the success rate across directions.
pub fn per_k_homogeneity(estimate: &ProtocolEstimate) -> Result<ChiSquareTest> {
    let table: Vec<Vec<u64>> = estimate
        .per_k_counts
        .iter()
        .map(|c| vec![c.positives, c.trials - c.positives])
        .collect();
    chi_square_homogeneity(&table)
}

/// Whether two runs are consistent with one success rate per direction.
pub fn compare_estimates(a: &ProtocolEstimate, b: &ProtocolEstimate) -> Result<ChiSquareTest> {
    let table = vec![
        vec![a.positives(), a.rounds - a.positives()],
        vec![b.positives(), b.rounds - b.positives()],
    ];
    chi_square_homogeneity(&table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::CollectiveOperator;
    use crate::states::{ghz_like, ghz_mixture, p_plus_phase, plus_x_ket, product_state};
    use crate::witness::{build_qk_closed_form, score};

    fn p_plus(kk: usize) -> QuantumState {
        ghz_like(&SpinEnsemble::qubits(kk).unwrap(), p_plus_phase(kk))
    }

    #[test]
    fn wilson_reference_values() {
        // 50 of 100: center 0.5, half-width z sqrt(0.25/100 + z^2/40000) / (1 + z^2/100)
        let (lo, hi) = wilson_interval(50, 100, Z_95);
        assert!((lo - 0.40383153).abs() < 1e-7 && (hi - 0.59616847).abs() < 1e-7);
        let (lo, hi) = wilson_interval(0, 10, Z_95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.27753279).abs() < 1e-7);
    }

    #[test]
    fn rejects_zero_rounds() {
        assert!(run_protocol(&ProtocolConfig::new(p_plus(3), 0, 1)).is_err());
    }

    #[test]
    fn deterministic_and_consistent() {
        let cfg = ProtocolConfig::new(p_plus(3), 20_000, 7);
        let a = run_protocol(&cfg).unwrap();
        let b = run_protocol(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.per_k_counts.iter().map(|c| c.trials).sum::<u64>(), 20_000);
        assert!(a.ci_low <= a.p_hat && a.p_hat <= a.ci_high);
        assert!((a.p_hat - 0.75).abs() < 0.015);
    }

    #[test]
    fn per_k_probabilities_match_score() {
        for kk in [3, 5] {
            let s = p_plus(kk);
            let q = per_k_probabilities(&s, 0.0).unwrap();
            let mean = q.iter().sum::<f64>() / kk as f64;
            let exact = score(&s, &build_qk_closed_form(s.ensemble(), 0.0)).unwrap();
            assert!((mean - exact).abs() < 1e-12);
            assert!(q.iter().all(|&x| (x - q[0]).abs() < 1e-12));
        }
    }

    #[test]
    fn stratified_mode_balances_trials() {
        let mut cfg = ProtocolConfig::new(p_plus(3), 3_001, 1);
        cfg.stratified = true;
        let est = run_protocol(&cfg).unwrap();
        let trials: Vec<u64> = est.per_k_counts.iter().map(|c| c.trials).collect();
        assert_eq!(trials, vec![1001, 1000, 1000]);
    }

    #[test]
    fn subensemble_partition_validation() {
        let mut cfg = ProtocolConfig::new(p_plus(3), 10, 0);
        for bad in [
            vec![vec![0], vec![1]],
            vec![vec![0, 1], vec![1, 2]],
            vec![vec![1, 0], vec![2]],
            vec![vec![0, 1, 2, 3]],
        ] {
            cfg.subensembles = Some(bad);
            assert!(run_protocol_subensembles(&cfg).is_err());
        }
        cfg.subensembles = None;
        assert!(run_protocol_subensembles(&cfg).is_err());
    }

    #[test]
    fn joint_outcomes_reproduce_matrix_side_probabilities() {
        let e = SpinEnsemble::from_values(&[0.5, 1.0, 1.0]).unwrap();
        let s = crate::states::random_ket(&e, 11);
        let q = per_k_probabilities(&s, 0.2).unwrap();
        for groups in [
            vec![vec![0], vec![1], vec![2]],
            vec![vec![0, 2], vec![1]],
            vec![vec![0, 1, 2]],
        ] {
            for (k, &qk) in q.iter().enumerate() {
                let outcomes = joint_outcomes(&s, &groups, k, 0.2).unwrap();
                let total: f64 = outcomes.iter().map(|o| o.0).sum();
                let pos: f64 = outcomes.iter().map(|&(p, v)| p * crate::witness::pos(v)).sum();
                assert!((total - 1.0).abs() < 1e-12);
                assert!((pos - qk).abs() < 1e-12, "{groups:?} k={k}");
            }
        }
    }

    #[test]
    fn product_state_subensembles() {
        let e = SpinEnsemble::qubits(3).unwrap();
        let plus = plus_x_ket(e.spins()[0]);
        let s = product_state(&e, &[plus.clone(), plus.clone(), plus]).unwrap();
        let exact = score(&s, &build_qk_closed_form(&e, 0.0)).unwrap();
        let mut cfg = ProtocolConfig::new(s, 50_000, 3);
        cfg.subensembles = Some(vec![vec![0], vec![1, 2]]);
        let est = run_protocol(&cfg).unwrap();
        assert!(est.ci_low <= exact && exact <= est.ci_high, "{exact} vs {est:?}");
    }

    #[test]
    fn mixture_is_inconclusive() {
        let s = ghz_mixture(&SpinEnsemble::qubits(3).unwrap());
        let est = run_protocol(&ProtocolConfig::new(s, 20_000, 0)).unwrap();
        assert_eq!(est.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn schedule_values() {
        let t = time_schedule(3, 2.0 * PI).unwrap();
        assert!((t[0]).abs() < 1e-15 && (t[1] - 1.0 / 3.0).abs() < 1e-15 && (t[2] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(time_schedule(1, 1.0).unwrap(), vec![0.0]);
        assert!(time_schedule(3, 0.0).is_err());
        assert!(time_schedule(3, -1.0).is_err());
    }

    #[test]
    fn heisenberg_picture_reproduces_directions() {
        let e = SpinEnsemble::qubits(5).unwrap();
        let j = CollectiveOperator::new(&e);
        let omega = 1.7;
        for (k, t) in time_schedule(5, omega).unwrap().into_iter().enumerate() {
            let h = heisenberg_jx(&j.jx, &j.jz, omega, t).unwrap();
            let jk = j.direction(k, 0.0).unwrap();
            assert!(h.matrix().max_abs_diff(jk.matrix()) < 1e-10);
            // The opposite ordering of the rotation sandwich gives the mirrored direction.
            let mirrored = rotate_about_z(&j.jx, &j.jz, -omega * t).unwrap();
            let jmk = j.direction((5 - k) % 5, 0.0).unwrap();
            assert!(mirrored.matrix().max_abs_diff(jmk.matrix()) < 1e-10);
        }
    }

    #[test]
    fn rounds_needed_scaling() {
        let n3 = rounds_needed(3, 0.5).unwrap();
        let n3_half = rounds_needed(3, 0.25).unwrap();
        let ratio = n3_half as f64 / n3 as f64;
        assert!((3.6..4.4).contains(&ratio));
        assert!(rounds_needed(19, 0.5).unwrap() > n3);
        assert!(rounds_needed(3, 1.0).is_err());
        assert!(rounds_needed(4, 0.5).is_err());
    }

    #[test]
    fn chi_square_reference() {
        // Table [[10, 20], [20, 10]]: expected 15 everywhere, statistic 4 * 25/15.
        let t = chi_square_homogeneity(&[vec![10, 20], vec![20, 10]]).unwrap();
        assert!((t.statistic - 20.0 / 3.0).abs() < 1e-12);
        assert_eq!(t.dof, 1);
        assert!((t.p_value - 0.009823).abs() < 1e-5);
        assert!(chi_square_homogeneity(&[vec![1, 2], vec![3]]).is_err());
    }
}
