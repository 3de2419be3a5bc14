//! `spinwit`: tables, verification suites, noise sweeps and protocol
//! simulations for the collective-spin GHZ witness.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::output::Format;

#[derive(Parser)]
#[command(name = "spinwit", version, about = "Collective-spin GHZ witness toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bounds P_max, P_sep, P_classical and the gap for a list of K.
    Table(TableArgs),
    /// Operator, separable-bound and noise consistency checks for one ensemble.
    Verify(VerifyArgs),
    /// Witness score of a GHZ-like state under depolarizing noise.
    NoiseSweep(NoiseSweepArgs),
    /// Monte Carlo run of the measurement protocol.
    Simulate(SimulateArgs),
    /// See-saw maximization over every bipartition.
    Seesaw(SeesawArgs),
    /// Witness built from f0 + f_odd(J_k) instead of the sign projector.
    GeneralWitness(GeneralWitnessArgs),
}

#[derive(Args, Serialize)]
pub struct OutputArgs {
    /// Write to this file and a sibling `.manifest.json` instead of stdout.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Defaults to csv, or json for simulate.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Serialize)]
pub struct EnsembleArgs {
    /// Comma-separated spins, e.g. "0.5,0.5,0.5" or "1,0.5".
    #[arg(long)]
    pub spins: Option<String>,
    /// K spin-1/2 particles (used when --spins is absent).
    #[arg(long = "K")]
    pub k: Option<usize>,
}

#[derive(Args, Serialize)]
pub struct TableArgs {
    /// Comma-separated K values.
    #[arg(
        long = "K",
        value_delimiter = ',',
        allow_negative_numbers = true,
        default_value = "3,5,7,9,11,13,15,17,19,41,101,399,401"
    )]
    pub k: Vec<i64>,
    /// Number of angles in the classical brute-force column.
    #[arg(long, default_value_t = 100_000)]
    pub grid: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Global,
    Local,
}

#[derive(Args, Serialize)]
pub struct NoiseSweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long, value_enum, default_value_t = Model::Global)]
    pub model: Model,
    /// start:stop:step
    #[arg(long, default_value = "0:1:0.05")]
    pub grid: String,
    /// Relative phase of the GHZ-like state; the witness phase is matched to it.
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    /// GHZ-like superposition of the two stretched states.
    Ghz,
    /// Equal mixture of the two stretched states.
    Mixture,
    /// Every particle in its +x eigenstate.
    ProductX,
}

#[derive(Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long, value_enum, default_value_t = StateKind::Ghz)]
    pub state: StateKind,
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub rounds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Particle groups measured separately, 1-based, e.g. "1|2,3".
    #[arg(long)]
    pub subensembles: Option<String>,
    /// Choose directions round-robin instead of uniformly at random.
    #[arg(long)]
    pub stratified: bool,
    /// Precession frequency; reports the measurement time of each direction.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, value_enum, requires = "noise")]
    pub model: Option<Model>,
    /// Depolarizing strength, shared by all particles under the local model.
    #[arg(long, group = "noise")]
    pub p: Option<f64>,
    /// Per-particle strengths for the local model.
    #[arg(long = "p-list", value_delimiter = ',', group = "noise")]
    pub p_list: Option<Vec<f64>>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Serialize)]
pub struct SeesawArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// GHZ phase the witness is matched to.
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OddFunction {
    /// sign(x)/2, which reproduces the projector witness when f0 = 1/2.
    Sign,
    Linear,
    Cubic,
    Tanh,
}

#[derive(Args, Serialize)]
pub struct GeneralWitnessArgs {
    #[arg(long = "K", value_delimiter = ',', default_value = "3,5,7")]
    pub k: Vec<usize>,
    #[arg(long = "f-odd", value_enum, default_value_t = OddFunction::Sign)]
    pub f_odd: OddFunction,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.5)]
    pub f0: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Table(a) => commands::table(a).and_then(|r| r.emit("table", a, None, &a.output)),
        Command::Verify(a) => commands::verify(a).and_then(|r| r.emit("verify", a, Some(a.seed), &a.output)),
        Command::NoiseSweep(a) => commands::noise_sweep(a).and_then(|r| r.emit("noise-sweep", a, None, &a.output)),
        Command::Simulate(a) => commands::simulate(a).and_then(|r| r.emit("simulate", a, Some(a.seed), &a.output)),
        Command::Seesaw(a) => commands::seesaw(a).and_then(|r| r.emit("seesaw", a, Some(a.seed), &a.output)),
        Command::GeneralWitness(a) => {
            commands::general_witness(a).and_then(|r| r.emit("general-witness", a, None, &a.output))
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("spinwit: {e}");
            e.exit_code()
        }
    }
}
