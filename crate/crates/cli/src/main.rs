mod commands;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use confinement_core::dynamics::{Metric, PerturbationShape, Sector};
use confinement_core::ground_state::Guess;
use confinement_core::{Execution, Resolution};

#[derive(Debug, Parser, Serialize)]
#[command(name = "confinement-lab", version, about = "Ground states, branches and stability for NLS with a partial harmonic trap")]
pub struct Cli {
    /// Worker threads for the data-parallel parts.
    #[arg(long, global = true, env = "CONFINEMENT_LAB_JOBS")]
    pub jobs: Option<usize>,
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Ground state at one λ.
    Solve(SolveArgs),
    /// Mass, action and slopes along the branch.
    Sweep(SweepArgs),
    /// Numerical check of an asymptotic or structural statement.
    Verify(VerifyArgs),
    /// One- and three-dimensional limit profiles.
    Limits(LimitsArgs),
    /// Two ground states of equal mass.
    Pair(PairArgs),
    /// Perturb a ground state and evolve it.
    Evolve(EvolveArgs),
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct GridArgs {
    /// Radial modes; with --mz selects a regime-adapted grid of that size.
    #[arg(long, requires = "mz")]
    pub k: Option<usize>,
    /// Axial modes.
    #[arg(long, requires = "k")]
    pub mz: Option<usize>,
}

impl GridArgs {
    pub fn resolution(&self) -> Resolution {
        match (self.k, self.mz) {
            (Some(k), Some(mz)) => Resolution::Adapted { k, mz },
            _ => Resolution::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuessArg {
    DimensionReduction,
    Soliton3d,
    Gaussian,
}

impl From<GuessArg> for Guess {
    fn from(g: GuessArg) -> Guess {
        match g {
            GuessArg::DimensionReduction => Guess::DimensionReduction,
            GuessArg::Soliton3d => Guess::Soliton3D,
            GuessArg::Gaussian => Guess::Gaussian,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    /// Single initial guess instead of the multi-start set.
    #[arg(long, value_enum)]
    pub guess: Option<GuessArg>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub p: f64,
    /// Explicit λ values; overrides the default sampling.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long, default_value_t = -40.0, allow_hyphen_values = true)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 0.01)]
    pub tau_min: f64,
    #[arg(long, default_value_t = 4)]
    pub per_decade: usize,
    /// Skip the finite-difference slope.
    #[arg(long)]
    pub no_fd: bool,
    /// Skip the linearized spectrum.
    #[arg(long)]
    pub no_eigs: bool,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Theorem {
    /// λ → −∞ regime.
    #[value(name = "1.3")]
    #[serde(rename = "1.3")]
    Far,
    /// λ → Λ₀ regime.
    #[value(name = "A.3")]
    #[serde(rename = "A.3")]
    Near,
    /// Bounded mass along the branch.
    #[value(name = "A.8")]
    #[serde(rename = "A.8")]
    MassBound,
    /// Slope signs and the two slope routes.
    #[value(name = "slopes")]
    #[serde(rename = "slopes")]
    Slopes,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub theorem: Theorem,
    #[arg(long)]
    pub p: f64,
    /// τ values for the near regime.
    #[arg(long, value_delimiter = ',')]
    pub tau: Option<Vec<f64>>,
    /// λ values for the far regime and the slope check.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda: Option<Vec<f64>>,
    #[arg(long, default_value_t = -40.0, allow_hyphen_values = true)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 0.01)]
    pub tau_min: f64,
    #[arg(long, default_value_t = 4)]
    pub per_decade: usize,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct LimitsArgs {
    #[arg(long)]
    pub p: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct PairArgs {
    #[arg(long)]
    pub p: f64,
    /// Target L² norm; the pair has mass c².
    #[arg(long)]
    pub c: f64,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeArg {
    Random,
    TransverseMode,
    AxialDilation,
}

impl From<ShapeArg> for PerturbationShape {
    fn from(s: ShapeArg) -> PerturbationShape {
        match s {
            ShapeArg::Random => PerturbationShape::Random,
            ShapeArg::TransverseMode => PerturbationShape::TransverseMode,
            ShapeArg::AxialDilation => PerturbationShape::AxialDilation,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorArg {
    Symmetric,
    Full,
}

impl From<SectorArg> for Sector {
    fn from(s: SectorArg) -> Sector {
        match s {
            SectorArg::Symmetric => Sector::Symmetric,
            SectorArg::Full => Sector::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricArg {
    H1v,
    L2,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::H1v => Metric::H1V,
            MetricArg::L2 => Metric::L2,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct EvolveArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 2e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 20.0)]
    pub t_final: f64,
    /// Relative size of the initial perturbation, at most 0.2.
    #[arg(long, default_value_t = 0.01)]
    pub amplitude: f64,
    #[arg(long, value_enum, default_value_t = ShapeArg::Random)]
    pub shape: ShapeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SectorArg::Symmetric)]
    pub sector: SectorArg,
    #[arg(long, value_enum, default_value_t = MetricArg::H1v)]
    pub metric: MetricArg,
    #[arg(long, default_value_t = 100)]
    pub record_every: usize,
    /// Stop once the orbital distance exceeds this value.
    #[arg(long)]
    pub stop_above: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
}

impl Cli {
    pub fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    confinement_core::exec::init_workers(cli.jobs);
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
