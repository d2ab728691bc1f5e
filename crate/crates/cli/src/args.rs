use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "measmap", version, about = "Invertible measurement maps: generate, certify, reconstruct")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a random map, state, pure state or sampled oracle pairs.
    Gen(GenArgs),
    /// Apply a map to a state.
    Apply(ApplyArgs),
    /// Certify segment containment and equality by sampling.
    CheckSegment(CheckSegmentArgs),
    /// Check that pure states map to pure states.
    CheckPure(CheckPureArgs),
    /// Check that orthonormal frames map to frames.
    CheckFrame(CheckFrameArgs),
    /// Inspect a qubit map on the Bloch ball.
    QubitBall(QubitBallArgs),
    /// Reconstruct (M, transpose) from a live oracle.
    Reconstruct(ReconstructArgs),
    /// Fit a fractional-linear representation to sampled pairs.
    FitPales(FitPalesArgs),
    /// Choi matrix and complete positivity of a map.
    Choi(ChoiArgs),
    /// Compare reconstructions on nested random subspaces.
    NestedCheck(NestedArgs),
}

#[derive(Args, Debug)]
pub struct Output {
    /// Output file; standard output when absent.
    #[arg(long = "out")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    /// Map JSON file or builtin name (identity, transpose, mixer, square, symmetrize, pinch).
    #[arg(long)]
    pub oracle: String,
    /// Dimension; required for builtins, checked against files.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Map,
    State,
    Pure,
    Samples,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: u64,
    /// Generate a map on the transposed branch.
    #[arg(long)]
    pub transpose: bool,
    /// Condition number bound for generated maps.
    #[arg(long, default_value_t = 100.0)]
    pub max_condition: f64,
    /// Oracle to sample for `--kind samples`.
    #[arg(long)]
    pub oracle: Option<String>,
    /// Number of pairs for `--kind samples`.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct ApplyArgs {
    /// Map JSON file or builtin name.
    #[arg(long)]
    pub map: String,
    /// State JSON file; standard input when absent.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SegmentMode {
    Containment,
    Equality,
    Both,
}

#[derive(Args, Debug)]
pub struct CheckSegmentArgs {
    #[command(flatten)]
    pub oracle: OracleArgs,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = measmap::geometry::DEFAULT_PAIRS)]
    pub pairs: usize,
    #[arg(long, default_value_t = measmap::geometry::DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = SegmentMode::Both)]
    pub mode: SegmentMode,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct CheckPureArgs {
    #[command(flatten)]
    pub oracle: OracleArgs,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Also check the inverse direction (measurement-map oracles only).
    #[arg(long)]
    pub inverse: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct CheckFrameArgs {
    #[command(flatten)]
    pub oracle: OracleArgs,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 20)]
    pub frames: usize,
    /// Whiten the oracle at I/n first.
    #[arg(long)]
    pub normalize: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct QubitBallArgs {
    #[command(flatten)]
    pub oracle: OracleArgs,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Whiten the oracle at I/2 first.
    #[arg(long)]
    pub normalize: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub oracle: OracleArgs,
    #[arg(long)]
    pub seed: u64,
    /// Largest accepted verification residual.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Verification states.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Also decide the branch from the Choi matrix of the interpolated map.
    #[arg(long)]
    pub cross_check: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct FitPalesArgs {
    /// Sampled pairs file (JSON array of {"input", "output"}).
    #[arg(long = "in", conflicts_with = "oracle")]
    pub input: Option<PathBuf>,
    /// Live oracle to sample instead of a pairs file.
    #[arg(long)]
    pub oracle: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Required with --oracle.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest accepted normalized residual.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Pairs drawn from a live oracle; twice the minimum when absent.
    #[arg(long)]
    pub samples: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct ChoiArgs {
    /// identity, transpose, or a map JSON file.
    #[arg(long)]
    pub map: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct NestedArgs {
    #[command(flatten)]
    pub oracle: OracleArgs,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub k1: usize,
    #[arg(long)]
    pub k2: usize,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[command(flatten)]
    pub output: Output,
}
