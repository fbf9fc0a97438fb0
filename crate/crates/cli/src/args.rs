use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "hiersim",
    version,
    about = "Qubit in a hierarchical cavity environment"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Survival amplitude and cavity amplitudes on a time grid.
    Dynamics(RunArgs),
    /// Non-Markovianity and speed-limit ratio at the horizon.
    Measure(RunArgs),
    /// Locate a Markovian / non-Markovian crossover.
    Critical(CriticalArgs),
    /// Evaluate measures over an Ω × N grid.
    Sweep(SweepArgs),
    /// Non-Markovianity, weak coupling: κ scans and the Ω–N plane.
    #[command(name = "repro-fig2")]
    ReproFig2(ReproArgs),
    /// Non-Markovianity, strong coupling: the Ω–N plane.
    #[command(name = "repro-fig3")]
    ReproFig3(ReproArgs),
    /// Speed-limit ratio, weak coupling: the Ω–N phase diagram.
    #[command(name = "repro-fig4")]
    ReproFig4(ReproArgs),
    /// Speed-limit ratio, strong coupling: the Ω–N plane.
    #[command(name = "repro-fig5")]
    ReproFig5(ReproArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TopologyArg {
    Reduced,
    Ring,
}

/// Model and grid flags. Unset flags fall back to the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Plain-text config with [model], [grid] and [sweep] sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Loss rate of the first-layer cavity.
    #[arg(long)]
    pub gamma0: Option<f64>,
    /// First-layer to second-layer coupling.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Nearest-neighbour coupling in the second layer.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Loss rate of the second-layer cavities.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub n_cavities: Option<usize>,
    /// Qubit coupling; sets the unit of every other rate.
    #[arg(long)]
    pub omega0: Option<f64>,
    #[arg(long, value_enum)]
    pub topology: Option<TopologyArg>,
    /// Evolution horizon.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Output grid spacing.
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG plot of the survival probability.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanArg {
    Omega,
    N,
    Kappa,
}

#[derive(Debug, Clone, Args)]
pub struct CriticalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum)]
    pub scan: ScanArg,
    /// Lower end of the scanned bracket.
    #[arg(long)]
    pub lo: Option<f64>,
    /// Upper end of the scanned bracket.
    #[arg(long)]
    pub hi: Option<f64>,
    /// Largest N tried by `--scan n`.
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepRangeArgs {
    #[arg(long)]
    pub omega_min: Option<f64>,
    #[arg(long)]
    pub omega_max: Option<f64>,
    #[arg(long)]
    pub omega_step: Option<f64>,
    #[arg(long)]
    pub n_min: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum MetricArg {
    #[default]
    QslRatio,
    Nonmarkovianity,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub range: SweepRangeArgs,
    /// Quantity shown in the heat map.
    #[arg(long, value_enum, default_value_t = MetricArg::QslRatio)]
    pub metric: MetricArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReproArgs {
    /// Directory receiving the CSV and SVG files.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Ω step of the plane sweeps.
    #[arg(long, default_value_t = 0.05)]
    pub omega_step: f64,
}
