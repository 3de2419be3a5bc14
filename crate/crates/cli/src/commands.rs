use std::f64::consts::{PI, TAU};

use serde::Serialize;
use spin_witness::classical::sweep_max;
use spin_witness::linalg::{eigenvalues, HermitianOperator};
use spin_witness::noise::{apply_depolarizing, is_detected, noisy_score_global, noisy_score_local, NoiseModel};
use spin_witness::protocol::{rounds_needed, run_protocol, ProtocolConfig};
use spin_witness::separable::{seesaw_all, SeeSawConfig};
use spin_witness::spin::{rotation, CollectiveOperator, Spin, SpinEnsemble};
use spin_witness::states::{ghz_like, ghz_mixture, p_plus_phase, plus_x_ket, product_state, QuantumState};
use spin_witness::witness::{
    build_qk_closed_form, build_qk_direct, generalized_witness, phase_for_ghz, score, witness_report, ExactValue,
};

use crate::output::{to_value, CliError, CliResult, Format, Report};
use crate::{
    EnsembleArgs, GeneralWitnessArgs, Model, NoiseSweepArgs, OddFunction, SeesawArgs, SimulateArgs, StateKind,
    TableArgs, VerifyArgs,
};

pub const TABLE_SCHEMA: &str = "spinwit.table/1";
pub const VERIFY_SCHEMA: &str = "spinwit.verify/1";
pub const NOISE_SCHEMA: &str = "spinwit.noise-sweep/1";
pub const SIMULATE_SCHEMA: &str = "spinwit.simulate/1";
pub const SEESAW_SCHEMA: &str = "spinwit.seesaw/1";
pub const GENERAL_SCHEMA: &str = "spinwit.general-witness/1";

/// Accepted shortfall of a see-saw maximum below the separable bound.
const SEESAW_SLACK: f64 = 1e-6;
/// Accepted excess of any product-state value above the separable bound.
const BOUND_EXCESS: f64 = 1e-9;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses "0.5,1,1.5"; every entry must be a nonnegative multiple of 1/2
/// and the total spin must be a half-integer.
pub fn parse_spins(input: &str) -> CliResult<SpinEnsemble> {
    let spins = input
        .split(',')
        .map(|tok| {
            let tok = tok.trim();
            let j: f64 = tok.parse().map_err(|_| usage(format!("cannot parse spin {tok:?}")))?;
            Ok(Spin::from_f64(j)?)
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(SpinEnsemble::new(spins)?)
}

fn resolve_ensemble(args: &EnsembleArgs) -> CliResult<SpinEnsemble> {
    match (&args.spins, args.k) {
        (Some(input), _) => parse_spins(input),
        (None, k) => Ok(SpinEnsemble::qubits(k.unwrap_or(3))?),
    }
}

/// Witness phase offset matched to the GHZ phase `phi`; zero for the default state.
fn matched_theta(phi: Option<f64>, kk: usize) -> f64 {
    phi.map_or(0.0, |phi| phase_for_ghz(phi, kk))
}

#[derive(Serialize)]
struct TableRow {
    k: i64,
    p_max: Option<String>,
    p_max_float: Option<f64>,
    p_sep: Option<String>,
    p_sep_float: Option<f64>,
    p_classical: Option<String>,
    p_classical_float: Option<f64>,
    gap: Option<String>,
    gap_float: Option<f64>,
    classical_sweep_max: Option<f64>,
    error: Option<String>,
}

fn split(v: &ExactValue) -> (Option<String>, Option<f64>) {
    (Some(v.exact.to_string()), Some(v.value))
}

pub fn table(args: &TableArgs) -> CliResult<Report> {
    if args.grid == 0 {
        return Err(usage("--grid must be positive"));
    }
    let rows: Vec<TableRow> = args
        .k
        .iter()
        .map(|&k| match witness_report(k) {
            Ok(r) => {
                let (p_max, p_max_float) = split(&r.p_max);
                let (p_sep, p_sep_float) = split(&r.p_sep);
                let (p_classical, p_classical_float) = split(&r.p_classical);
                let (gap, gap_float) = split(&r.gap);
                TableRow {
                    k,
                    p_max,
                    p_max_float,
                    p_sep,
                    p_sep_float,
                    p_classical,
                    p_classical_float,
                    gap,
                    gap_float,
                    classical_sweep_max: sweep_max(r.k, args.grid).ok().map(|s| s.max_score),
                    error: None,
                }
            }
            Err(e) => TableRow {
                k,
                p_max: None,
                p_max_float: None,
                p_sep: None,
                p_sep_float: None,
                p_classical: None,
                p_classical_float: None,
                gap: None,
                gap_float: None,
                classical_sweep_max: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let mut report = Report::from_rows(TABLE_SCHEMA, &rows)?;
    if rows.iter().all(|r| r.error.is_some()) {
        report.failure = Some(usage("no valid K in the list (K must be a positive odd integer)"));
    }
    Ok(report)
}

#[derive(Serialize)]
struct Check {
    suite: &'static str,
    check: String,
    value: f64,
    target: f64,
    tolerance: f64,
    pass: bool,
}

impl Check {
    fn new(suite: &'static str, check: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Check {
            suite,
            check: check.into(),
            value,
            target,
            tolerance,
            pass: (value - target).abs() <= tolerance,
        }
    }

    /// Passes when `target - below <= value <= target + above`.
    fn within(suite: &'static str, check: impl Into<String>, value: f64, target: f64, below: f64, above: f64) -> Self {
        Check {
            suite,
            check: check.into(),
            value,
            target,
            tolerance: below.max(above),
            pass: value >= target - below && value <= target + above,
        }
    }
}

fn witness_checks(e: &SpinEnsemble, p_max: f64) -> CliResult<Vec<Check>> {
    let kk = e.k();
    let d = e.dim() as f64;
    let mut out = Vec::new();
    for theta in [0.0, 0.37] {
        let direct = build_qk_direct(e, theta);
        let closed = build_qk_closed_form(e, theta);
        let diff = direct.operator().matrix().max_abs_diff(closed.operator().matrix());
        out.push(Check::new(
            "witness",
            format!("direct vs closed form, theta={theta}"),
            diff,
            0.0,
            1e-10,
        ));
    }
    let q = build_qk_closed_form(e, 0.0);
    let op = q.operator();
    out.push(Check::new("witness", "trace", op.trace(), d / 2.0, 1e-9));
    let ev = eigenvalues(op);
    out.push(Check::new(
        "witness",
        "largest eigenvalue",
        ev[ev.len() - 1],
        p_max,
        1e-9,
    ));
    out.push(Check::new("witness", "smallest eigenvalue", ev[0], 1.0 - p_max, 1e-9));
    let ghz = ghz_like(e, p_plus_phase(kk));
    out.push(Check::new("witness", "GHZ score", score(&ghz, &q)?, p_max, 1e-10));

    let j = CollectiveOperator::new(e);
    let symmetry = |generator: &HermitianOperator, angle: f64| -> CliResult<f64> {
        let rotated = op.conjugate_by(&rotation(generator, angle))?;
        Ok(rotated.matrix().max_abs_diff(op.matrix()))
    };
    out.push(Check::new(
        "witness",
        "invariant under z rotation by 2pi/K",
        symmetry(&j.jz, TAU / kk as f64)?,
        0.0,
        1e-9,
    ));
    out.push(Check::new(
        "witness",
        "invariant under x rotation by pi",
        symmetry(&j.jx, PI)?,
        0.0,
        1e-9,
    ));
    Ok(out)
}

fn noise_checks(e: &SpinEnsemble) -> CliResult<Vec<Check>> {
    let q = build_qk_closed_form(e, 0.0);
    let ghz = ghz_like(e, p_plus_phase(e.k()));
    let mut out = Vec::new();
    for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let global = score(&apply_depolarizing(&ghz, &NoiseModel::global(p)?)?, &q)?;
        out.push(Check::new(
            "noise",
            format!("global p={p}"),
            global,
            noisy_score_global(e.k(), p)?,
            1e-10,
        ));
        let ps = vec![p; e.len()];
        let local = score(&apply_depolarizing(&ghz, &NoiseModel::local(ps.clone())?)?, &q)?;
        out.push(Check::new(
            "noise",
            format!("local p={p}"),
            local,
            noisy_score_local(e, &ps)?,
            1e-10,
        ));
    }
    Ok(out)
}

pub fn verify(args: &VerifyArgs) -> CliResult<Report> {
    let e = resolve_ensemble(&args.ensemble)?;
    let r = witness_report(e.k() as i64)?;
    let mut checks = witness_checks(&e, r.p_max.value)?;
    let cfg = SeeSawConfig {
        restarts: args.restarts.max(1),
        seed: args.seed,
        ..Default::default()
    };
    for res in seesaw_all(&build_qk_closed_form(&e, 0.0), &cfg)? {
        let label = format!("bipartition {}", res.bipartition.label());
        checks.push(Check::within(
            "separable",
            label,
            res.best_value,
            r.p_sep.value,
            SEESAW_SLACK,
            BOUND_EXCESS,
        ));
    }
    checks.extend(noise_checks(&e)?);
    let failed = checks.iter().filter(|c| !c.pass).count();
    let mut report = Report::from_rows(VERIFY_SCHEMA, &checks)?;
    if failed > 0 {
        report.failure = Some(CliError::Failed(format!(
            "{failed} of {} checks failed for {e}",
            checks.len()
        )));
    }
    Ok(report)
}

/// Parses "start:stop:step" into grid points rounded to the precision of the input.
pub fn parse_grid(input: &str) -> CliResult<Vec<f64>> {
    let bad = || {
        usage(format!(
            "bad grid {input:?}: expected start:stop:step within [0, 1] with step > 0"
        ))
    };
    let parts: Vec<&str> = input.split(':').map(str::trim).collect();
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    let nums = [start, stop, step]
        .iter()
        .map(|t| t.parse::<f64>().map_err(|_| bad()))
        .collect::<CliResult<Vec<_>>>()?;
    let (a, b, h) = (nums[0], nums[1], nums[2]);
    if !(a.is_finite() && b.is_finite() && h.is_finite()) || h <= 0.0 || a < 0.0 || b > 1.0 || a > b {
        return Err(bad());
    }
    let decimals = [start, stop, step]
        .iter()
        .map(|t| t.split_once('.').map_or(0, |(_, frac)| frac.len()))
        .max()
        .unwrap_or(0)
        .min(15) as i32;
    let scale = 10f64.powi(decimals);
    let n = ((b - a) / h + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| ((a + i as f64 * h) * scale).round() / scale).collect())
}

#[derive(Serialize)]
struct NoiseRow {
    p: f64,
    closed_form_score: f64,
    brute_force_score: f64,
    p_sep: f64,
    detected: bool,
}

pub fn noise_sweep(args: &NoiseSweepArgs) -> CliResult<Report> {
    let e = resolve_ensemble(&args.ensemble)?;
    let grid = parse_grid(&args.grid)?;
    let kk = e.k();
    let phi = args.phi.unwrap_or_else(|| p_plus_phase(kk));
    let q = build_qk_closed_form(&e, matched_theta(args.phi, kk));
    let ghz = ghz_like(&e, phi);
    let p_sep = witness_report(kk as i64)?.p_sep.value;
    let rows = grid
        .iter()
        .map(|&p| {
            let (model, closed) = match args.model {
                Model::Global => (NoiseModel::global(p)?, noisy_score_global(kk, p)?),
                Model::Local => (
                    NoiseModel::local_identical(p, e.len())?,
                    noisy_score_local(&e, &vec![p; e.len()])?,
                ),
            };
            let brute = score(&apply_depolarizing(&ghz, &model)?, &q)?;
            Ok(NoiseRow {
                p,
                closed_form_score: closed,
                brute_force_score: brute,
                p_sep,
                detected: is_detected(closed, kk)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Report::from_rows(NOISE_SCHEMA, &rows)
}

/// Parses "1|2,3" (1-based particles) into 0-based groups.
pub fn parse_subensembles(input: &str) -> CliResult<Vec<Vec<usize>>> {
    input
        .split('|')
        .map(|group| {
            group
                .split(',')
                .map(|t| match t.trim().parse::<usize>() {
                    Ok(n) if n >= 1 => Ok(n - 1),
                    _ => Err(usage(format!("bad particle {t:?} in --subensembles (1-based indices)"))),
                })
                .collect()
        })
        .collect()
}

fn noise_model(args: &SimulateArgs, n: usize) -> CliResult<Option<NoiseModel>> {
    let model = args.model.unwrap_or(Model::Global);
    Ok(match (model, args.p, &args.p_list) {
        (_, None, None) => None,
        (Model::Global, Some(p), _) => Some(NoiseModel::global(p)?),
        (Model::Local, Some(p), _) => Some(NoiseModel::local_identical(p, n)?),
        (Model::Local, None, Some(ps)) => {
            if ps.len() != n {
                return Err(usage(format!("--p-list has {} entries for {n} particles", ps.len())));
            }
            Some(NoiseModel::local(ps.clone())?)
        }
        (Model::Global, None, Some(_)) => return Err(usage("--p-list requires --model local")),
    })
}

#[derive(Serialize)]
struct SimulateSummary {
    ensemble: String,
    k: usize,
    state: StateKind,
    theta_offset: f64,
    rounds: u64,
    seed: u64,
    exact_score: f64,
    p_hat: f64,
    ci_low: f64,
    ci_high: f64,
    p_sep: f64,
    verdict: String,
    suggested_rounds: u64,
}

pub fn simulate(args: &SimulateArgs) -> CliResult<Report> {
    let e = resolve_ensemble(&args.ensemble)?;
    let kk = e.k();
    if args.rounds == 0 {
        return Err(usage("--rounds must be positive"));
    }
    if args.omega.is_some_and(|w| !(w.is_finite() && w > 0.0)) {
        return Err(usage("--omega must be a positive number"));
    }
    let theta = matched_theta(args.phi, kk);
    let mut state: QuantumState = match args.state {
        StateKind::Ghz => ghz_like(&e, args.phi.unwrap_or_else(|| p_plus_phase(kk))),
        StateKind::Mixture => ghz_mixture(&e),
        StateKind::ProductX => product_state(&e, &e.spins().iter().map(|&s| plus_x_ket(s)).collect::<Vec<_>>())?,
    };
    if let Some(model) = noise_model(args, e.len())? {
        state = apply_depolarizing(&state, &model)?;
    }
    let exact_score = score(&state, &build_qk_closed_form(&e, theta))?;
    let mut cfg = ProtocolConfig::new(state, args.rounds, args.seed);
    cfg.theta_offset = theta;
    cfg.stratified = args.stratified;
    cfg.omega = args.omega;
    cfg.subensembles = args.subensembles.as_deref().map(parse_subensembles).transpose()?;
    let est = run_protocol(&cfg)?;

    let summary = SimulateSummary {
        ensemble: e.to_string(),
        k: kk,
        state: args.state,
        theta_offset: theta,
        rounds: est.rounds,
        seed: args.seed,
        exact_score,
        p_hat: est.p_hat,
        ci_low: est.ci_low,
        ci_high: est.ci_high,
        p_sep: est.p_sep,
        verdict: est.verdict.to_string(),
        suggested_rounds: rounds_needed(kk, 0.5)?,
    };
    let mut report = Report::from_rows(SIMULATE_SCHEMA, &[&summary])?;
    let mut object = to_value(&summary)?;
    if let serde_json::Value::Object(fields) = &mut object {
        fields.insert("positives".into(), est.positives().into());
        fields.insert("per_k_counts".into(), to_value(&est.per_k_counts)?);
        if let Some(times) = &est.times {
            fields.insert("times".into(), to_value(times)?);
        }
    }
    report.object = Some(object);
    report.default_format = Format::Json;
    Ok(report)
}

#[derive(Serialize)]
struct SeesawRow {
    bipartition: String,
    j_tilde: String,
    j_tilde_prime: String,
    best_value: f64,
    p_sep: f64,
    deviation: f64,
    iterations: usize,
    restarts_used: usize,
    converged: bool,
    monotone: bool,
}

pub fn seesaw(args: &SeesawArgs) -> CliResult<Report> {
    let e = resolve_ensemble(&args.ensemble)?;
    if args.restarts == 0 {
        return Err(usage("--restarts must be positive"));
    }
    let kk = e.k();
    let q = build_qk_closed_form(&e, matched_theta(args.phi, kk));
    let p_sep = witness_report(kk as i64)?.p_sep.value;
    let cfg = SeeSawConfig {
        restarts: args.restarts,
        seed: args.seed,
        ..Default::default()
    };
    let rows: Vec<SeesawRow> = seesaw_all(&q, &cfg)?
        .into_iter()
        .map(|r| SeesawRow {
            bipartition: r.bipartition.label(),
            j_tilde: r.bipartition.j_tilde.to_string(),
            j_tilde_prime: r.bipartition.j_tilde_prime.to_string(),
            best_value: r.best_value,
            p_sep,
            deviation: r.best_value - p_sep,
            iterations: r.iterations,
            restarts_used: r.restarts_used,
            converged: r.converged,
            monotone: r.monotone,
        })
        .collect();
    let bad: Vec<&str> = rows
        .iter()
        .filter(|r| r.deviation > BOUND_EXCESS || r.deviation < -SEESAW_SLACK)
        .map(|r| r.bipartition.as_str())
        .collect();
    let mut report = Report::from_rows(SEESAW_SCHEMA, &rows)?;
    if !bad.is_empty() {
        report.failure = Some(CliError::Failed(format!(
            "see-saw maximum off the bound on {}",
            bad.join(", ")
        )));
    }
    Ok(report)
}

#[derive(Serialize)]
struct GeneralRow {
    k: usize,
    f_odd: OddFunction,
    f0: f64,
    f_k: f64,
    sep_bound: f64,
    max_score: f64,
    detects_ghz: bool,
}

fn odd_function(kind: OddFunction) -> fn(f64) -> f64 {
    match kind {
        OddFunction::Sign => |x| {
            if x > 0.0 {
                0.5
            } else if x < 0.0 {
                -0.5
            } else {
                0.0
            }
        },
        OddFunction::Linear => |x| x,
        OddFunction::Cubic => |x| x * x * x,
        OddFunction::Tanh => f64::tanh,
    }
}

pub fn general_witness(args: &GeneralWitnessArgs) -> CliResult<Report> {
    let f = odd_function(args.f_odd);
    let rows = args
        .k
        .iter()
        .map(|&k| {
            let g = generalized_witness(&SpinEnsemble::qubits(k)?, args.f0, &f)?;
            Ok(GeneralRow {
                k,
                f_odd: args.f_odd,
                f0: g.f0,
                f_k: g.f_k,
                sep_bound: g.sep_bound,
                max_score: g.max_score,
                detects_ghz: g.detects_ghz(),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Report::from_rows(GENERAL_SCHEMA, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spins_parse_halves_only() {
        assert_eq!(parse_spins("0.5, 1,1").unwrap().k(), 5);
        assert!(matches!(parse_spins("0.5,1.5"), Err(CliError::Usage(_))));
        assert!(matches!(parse_spins("0.3"), Err(CliError::Usage(_))));
        assert!(matches!(parse_spins("x"), Err(CliError::Usage(_))));
        assert!(matches!(parse_spins("-0.5"), Err(CliError::Usage(_))));
    }

    #[test]
    fn grid_points_are_rounded_to_input_precision() {
        let g = parse_grid("0:1:0.05").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[3], 0.15);
        assert_eq!(g[20], 1.0);
        assert_eq!(parse_grid("0.2:0.2:0.1").unwrap(), vec![0.2]);
        for bad in ["0:1", "0:1:0", "0:2:0.1", "0.5:0.1:0.1", "a:b:c", "0:1:-0.1"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn subensembles_are_one_based() {
        assert_eq!(parse_subensembles("1|2,3").unwrap(), vec![vec![0], vec![1, 2]]);
        assert!(parse_subensembles("0|1").is_err());
        assert!(parse_subensembles("1||2").is_err());
    }

    #[test]
    fn even_ensembles_are_usage_errors() {
        let args = EnsembleArgs {
            spins: Some("0.5,0.5".into()),
            k: None,
        };
        let Err(CliError::Usage(msg)) = resolve_ensemble(&args) else {
            panic!("expected usage error");
        };
        assert!(msg.contains("K = 2") && msg.contains("odd"));
    }

    #[test]
    fn sign_function_reproduces_projector_bound() {
        for k in [3usize, 5] {
            let g =
                generalized_witness(&SpinEnsemble::qubits(k).unwrap(), 0.5, &odd_function(OddFunction::Sign)).unwrap();
            assert!((g.sep_bound - witness_report(k as i64).unwrap().p_sep.value).abs() < 1e-12);
        }
    }
}
