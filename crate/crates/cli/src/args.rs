use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cclab", version, about = "Semi-random correlation clustering toolkit")]
pub struct Cli {
    /// Exit with code 5 when the relaxation solver does not converge.
    #[arg(long, global = true)]
    pub strict: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance and its ground-truth sidecar.
    Generate(GenerateArgs),
    /// Solve the vector relaxation of an instance.
    Solve(SolveArgs),
    /// Prune edges by relaxation value, then local search on the rest.
    Ptas(PtasArgs),
    /// Greedy ball-graph recovery of the planted clusters.
    Recover(RecoverArgs),
    /// Score a clustering against an instance (and its truth, if present).
    Evaluate(EvaluateArgs),
    /// Structural statistics, recovery assumptions and core geometry.
    Validate(ValidateArgs),
    /// Monte-Carlo simulation of the betting game.
    Game(GameArgs),
    /// Planted-partition recovery benchmark.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    GnpPlanted,
    Basic,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Costs {
    Unit,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Flip,
    Keep,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value = "gnp-planted")]
    pub model: Model,
    #[arg(long)]
    pub n: usize,
    /// Edge probability of the underlying graph.
    #[arg(long, default_value_t = 0.25)]
    pub p: f64,
    /// Number of planted clusters.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = 0.2)]
    pub epsilon: f64,
    #[arg(long)]
    pub seed: u64,
    /// Instance path; the truth goes next to it with a `.truth` extension.
    #[arg(long)]
    pub out: PathBuf,
    /// Edge costs for the basic model.
    #[arg(long, value_enum, default_value = "unit")]
    pub costs: Costs,
    /// Sign of random edges for the basic model.
    #[arg(long, value_enum, default_value = "flip")]
    pub sign_policy: Policy,
    /// Edges the adaptive adversary adds (default: p times the pair count).
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long)]
    pub seed: u64,
    /// Factor rank (default depends on n and --k-guess).
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub k_guess: usize,
    #[arg(long, default_value_t = 3000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the solution dump here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PtasArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Pruning threshold, or `schedule` for (n ln n / c(E))^(1/6) capped at 0.45.
    #[arg(long, default_value = "0.1")]
    pub delta: String,
    #[arg(long, default_value_t = 50)]
    pub max_passes: usize,
    /// Write the cluster labels here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 0.1)]
    pub rho_core: f64,
    #[arg(long)]
    pub no_cleanup: bool,
    /// Clusters at or above this size are never merged away (default: no cap).
    #[arg(long)]
    pub cleanup_min_size: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub merge_threshold: f64,
    /// Write the cluster labels here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Use a saved solution instead of solving.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// Pruning threshold (default: the schedule).
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GameArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub epsilon: f64,
    /// fixed-order, stop-at-first-loss or double-down.
    #[arg(long, default_value = "fixed-order")]
    pub strategy: String,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Runs per row; run i uses seed + i.
    #[arg(long, default_value_t = 4)]
    pub runs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.2)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Rows as `n:p` pairs, e.g. `200:0.25,400:0.19`.
    #[arg(long, value_delimiter = ',')]
    pub rows: Vec<String>,
    /// Add the n = 2000 row.
    #[arg(long)]
    pub slow: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Print the planned runs without executing them.
    #[arg(long)]
    pub dry_run: bool,
}
