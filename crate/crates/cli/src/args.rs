//! Command-line argument definitions.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "nyskit",
    version,
    about = "Nystrom kernel approximation experiment harness",
    after_help = "Exit codes: 0 success, 1 config error, 2 data error, 3 numerical failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Kernel approximation error sweep over landmark counts and ranks
    Approx(ApproxArgs),
    /// Kernel ridge regression sweep (requires a dataset with responses)
    Krr(KrrArgs),
    /// Write the selected landmark coordinates to CSV
    Landmarks(LandmarkArgs),
}

#[derive(Args, Debug)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct KrrArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Ridge regularizer
    #[arg(long, default_value_t = 0.25)]
    pub lambda: f64,
}

#[derive(Args, Debug)]
pub struct LandmarkArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct CommonArgs {
    /// LIBSVM data file
    #[arg(long, conflicts_with = "synth")]
    pub data: Option<PathBuf>,

    /// Synthetic dataset
    #[arg(long, value_enum)]
    pub synth: Option<SynthKind>,

    /// Point count for --synth two-rings
    #[arg(long, default_value_t = 4000)]
    pub synth_n: usize,

    /// Radial noise for --synth two-rings
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,

    /// Expected feature dimension for LIBSVM input (default: largest index)
    #[arg(long)]
    pub dim: Option<usize>,

    /// Repeat each point this many times after loading
    #[arg(long, default_value_t = 1)]
    pub dup_points: usize,

    /// Repeat each feature this many times after loading
    #[arg(long, default_value_t = 1)]
    pub dup_features: usize,

    /// Keep a uniform without-replacement subsample of this many points
    #[arg(long)]
    pub subsample: Option<usize>,

    /// Kernel family
    #[arg(long, value_enum, default_value_t = KernelArg::Gaussian)]
    pub kernel: KernelArg,

    /// Kernel parameter c: Gaussian width or polynomial offset, or "auto"
    /// for the averaged squared distance to the sample mean
    #[arg(long, default_value = "auto")]
    pub c: String,

    /// Polynomial degree
    #[arg(long, default_value_t = 2)]
    pub d: u32,

    /// Target ranks, comma separated
    #[arg(long = "rank", value_delimiter = ',')]
    pub rank: Vec<usize>,

    /// Landmark counts, comma separated
    #[arg(long = "landmarks", value_delimiter = ',')]
    pub landmarks: Vec<usize>,

    /// Landmark selection method ("svd" is the exact dense baseline)
    #[arg(long, value_enum)]
    pub method: MethodArg,

    /// Rank-restriction algorithm
    #[arg(long, value_enum, default_value_t = RestrictArg::Qr)]
    pub restrict: RestrictArg,

    /// Compression factor in (0, 1]; required by (and only by) randclustered
    #[arg(long)]
    pub gamma: Option<f64>,

    /// Independent trials per cell
    #[arg(long, default_value_t = 1)]
    pub trials: usize,

    /// Master seed; trial t uses the derived sub-seed mix(seed, t)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Lloyd iteration cap for the clustered methods
    #[arg(long = "kmeans-iters", default_value_t = 10)]
    pub kmeans_iters: usize,

    /// Row-block height for the streaming error computation
    #[arg(long, default_value_t = 512)]
    pub block: usize,

    /// Timing column: wall-clock measurements, or zeros for byte-identical
    /// reruns of the same config
    #[arg(long, value_enum, default_value_t = TimingArg::Wall)]
    pub timing: TimingArg,

    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthKind {
    /// Two concentric noisy rings in the plane
    #[value(name = "two-rings")]
    TwoRings,
    /// The 3x3 worked example (landmarks are always the first m columns)
    Toy,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelArg {
    Gaussian,
    Poly,
    Linear,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodArg {
    Uniform,
    Colnorm,
    Diag,
    Clustered,
    Randclustered,
    Svd,
}

impl MethodArg {
    pub fn name(self) -> &'static str {
        match self {
            MethodArg::Uniform => "uniform",
            MethodArg::Colnorm => "colnorm",
            MethodArg::Diag => "diag",
            MethodArg::Clustered => "clustered",
            MethodArg::Randclustered => "randclustered",
            MethodArg::Svd => "svd",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestrictArg {
    /// Optimal rank restriction through the QR route
    Qr,
    /// Classical restriction that truncates the landmark matrix
    Standard,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimingArg {
    Wall,
    None,
}
