use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "avcgame", version, about = "Jamming games over arbitrarily varying channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Deterministic-code capacity of the AVC and the saddle point.
    Capacity(Common),
    /// Rate-distortion function of the source.
    Rd(Common),
    /// Channel and source dispersions.
    Dispersion(Common),
    /// Symmetrizability test and, when not symmetrizable, the margin η̂*.
    Symmetrizable(Common),
    /// Exact lower value, mixed value and upper value estimate.
    ExactGame(ExactGameArgs),
    /// SC(q), LP(q), the dual-point bound at q and its maximum over a grid.
    LpBound(LpBoundArgs),
    /// Finite-blocklength bounds.
    FbBound(FbBoundArgs),
    /// Monte Carlo simulation of the random or stochastic code.
    Simulate(SimulateArgs),
    /// Bounds along a grid of one parameter, written as CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Instance file (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo trials; evaluators that support sampling switch to it.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Overrides the enumeration budget of the instance.
    #[arg(long)]
    pub budget: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ExactGameArgs {
    #[command(flatten)]
    pub common: Common,
    /// Multistart count of the upper value estimate.
    #[arg(long, default_value_t = 32)]
    pub starts: usize,
}

#[derive(Debug, Args)]
pub struct LpBoundArgs {
    #[command(flatten)]
    pub common: Common,
    /// Jammer law over state sequences, comma separated. Defaults to the
    /// maximin law of the exact game when it is enumerable, else uniform.
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long, value_enum, default_value_t = PartitionArg::Types)]
    pub partition: PartitionArg,
    #[arg(long, value_enum, default_value_t = AuxArg::TypeIid)]
    pub aux: AuxArg,
    /// Size limit of the jammer grid for the maximin bound.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PartitionArg {
    Types,
    Single,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AuxArg {
    TypeIid,
    Uniform,
}

#[derive(Debug, Args)]
pub struct FbBoundArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated subset of t4,t5,t7,t8,t9,t10,t11,t12,limit,rates.
    #[arg(long, default_value = "t10,t11,t12,limit")]
    pub which: String,
    /// Channel blocklength of the asymptotic bounds (default: the instance's n).
    #[arg(long)]
    pub n: Option<f64>,
    /// Source blocklength of the asymptotic bounds (default: the instance's k).
    #[arg(long)]
    pub k: Option<f64>,
    /// ρ of the second-order limit (default: bound_params.rho).
    #[arg(long)]
    pub rho: Option<f64>,
    /// Target error of the dispersion rates.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Typicality threshold of the index code, in bits.
    #[arg(long, default_value_t = 0.5)]
    pub typ_gamma: f64,
    /// Number of index-code messages in the tiny-instance bounds.
    #[arg(long, default_value_t = 2.0)]
    pub m_codes: f64,
    /// Index-code blocklength of the tiny-instance composite bound.
    #[arg(long, default_value_t = 2)]
    pub d_n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimMode {
    /// A fresh code from the random ensemble in every trial.
    Random,
    /// A uniformly chosen code of a reduced ensemble, announced by a prefix code.
    Stochastic,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = SimMode::Random)]
    pub mode: SimMode,
    /// `greedy`, `iid` (the saddle-point state law) or `fixed=<digits>`.
    #[arg(long, default_value = "greedy")]
    pub jammer: String,
    /// Evaluation budget of the greedy jammer.
    #[arg(long, default_value_t = 1000)]
    pub jammer_budget: usize,
    /// Encoder cap parameter (default: the optimal γ of the weak bound).
    #[arg(long)]
    pub gamma_l: Option<f64>,
    /// Ensemble size of the stochastic code (default: the reduction condition).
    #[arg(long)]
    pub k_codes: Option<usize>,
    /// Prefix blocklength (default: the shortest that carries K indices).
    #[arg(long)]
    pub d_n: Option<usize>,
    /// Transcript CSV of the first trials.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub transcript_limit: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    N,
    Rho,
    Eps,
    #[value(name = "d_max", alias = "d-max")]
    DMax,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub axis: Option<Axis>,
    /// `a,b,c`, `a..b` or `a..b:count`. Ranges are geometric on the n axis
    /// and linear elsewhere.
    #[arg(long)]
    pub grid: Option<String>,
    /// Comma-separated subset of t9,t10,t11,t12,limit,rates.
    #[arg(long, default_value = "t11,t12,limit")]
    pub which: String,
    /// Fixed n, or a grid when no axis is given.
    #[arg(long, default_value = "1e6")]
    pub n: String,
    #[arg(long, default_value = "0")]
    pub rho: String,
    #[arg(long, default_value = "0.1")]
    pub eps: String,
    /// Fixed distortion threshold (default: the instance's), or a grid.
    #[arg(long)]
    pub d_max: Option<String>,
    /// CSV destination (default: stdout).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}
