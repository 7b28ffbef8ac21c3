use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "heislim",
    version,
    about = "Experiments on rectangles in the Heisenberg group"
)]
pub struct Cli {
    /// TOML config file. Flags given on the command line win over its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Output CSV path, `-` for stdout. Defaults to `$HEISLIM_OUT_DIR/<command>.csv`
    /// when that variable is set, stdout otherwise.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Worker threads, 0 for one per core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the shape function Φ^t(r).
    Phi(PhiArgs),
    /// Dimension threshold of the power-law radii (n^-α, n^-β).
    Threshold(ThresholdArgs),
    /// Build covers, check their density and report the t-content.
    Cover(CoverArgs),
    /// Monte Carlo Riesz energy of rectangles against the closed-form bound.
    Energy(EnergyArgs),
    /// Capacity lower bounds λ(R)²/I_t(R) for rectangles.
    Capacity(EnergyArgs),
    /// Box-count random generations of rectangles.
    Simulate(SimulateArgs),
    /// Averaging gadgets.
    #[command(subcommand)]
    Gadgets(GadgetsCommand),
    /// Run the acceptance suite.
    Accept(AcceptArgs),
}

#[derive(Debug, Subcommand)]
pub enum GadgetsCommand {
    /// Block coefficient table a[n][k].
    Coeffs(CoeffsArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RadiiArgs {
    /// Horizontal radii.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub r1: Vec<f64>,
    /// Vertical radii; every (r1, r2) pair is used.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub r2: Vec<f64>,
    /// Use the dyadic sweep r = (2^-j, 2^-k), 0 <= j, k <= SWEEP, instead of --r1/--r2.
    #[arg(long)]
    pub sweep: Option<u32>,
}

impl RadiiArgs {
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        match self.sweep {
            Some(m) => (0..=m)
                .flat_map(|j| {
                    (0..=m).map(move |k| (2f64.powi(-(j as i32)), 2f64.powi(-(k as i32))))
                })
                .collect(),
            None => self
                .r1
                .iter()
                .flat_map(|&a| self.r2.iter().map(move |&b| (a, b)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PhiArgs {
    /// Exponents in [0, 4].
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub t: Vec<f64>,
    #[command(flatten)]
    pub radii: RadiiArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CoverArgs {
    #[arg(long, value_delimiter = ',', default_value = "3.5")]
    pub t: Vec<f64>,
    #[command(flatten)]
    pub radii: RadiiArgs,
    /// Density check samples per cover.
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sampling {
    /// Uniform points mixed with a multiscale kernel proposal.
    Mixture,
    /// Independent uniform pairs.
    Uniform,
}

#[derive(Debug, Clone, Args)]
pub struct EnergyArgs {
    /// Exponents in (0, 4).
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub t: Vec<f64>,
    #[command(flatten)]
    pub radii: RadiiArgs,
    #[arg(long, default_value_t = 100_000)]
    pub pairs: u64,
    #[arg(long, value_enum, default_value_t = Sampling::Mixture)]
    pub sampling: Sampling,
    /// Weight of the uniform component of the mixture, in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub uniform_weight: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DeltaRule {
    /// δ = max(r1, r2) at n = N.
    Radius,
    /// δ = N^-e with e from --delta-exponent.
    Power,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Window as x0,y0,z0,x1,y1,z1.
    #[arg(
        long,
        value_delimiter = ',',
        num_args = 6,
        default_value = "0,0,0,1,1,1"
    )]
    pub window: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    /// Generation sizes; generation N uses rectangles N..=2N.
    #[arg(long = "n", value_delimiter = ',', default_value = "1000,10000,100000")]
    pub n: Vec<usize>,
    #[arg(long, value_enum, default_value_t = DeltaRule::Radius)]
    pub delta_rule: DeltaRule,
    #[arg(long, default_value_t = 0.5)]
    pub delta_exponent: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Weights {
    /// b_k = 1.
    One,
    /// b_k = 1 + log k.
    Log,
}

#[derive(Debug, Clone, Args)]
pub struct CoeffsArgs {
    #[arg(long, value_enum, default_value_t = Weights::One)]
    pub weights: Weights,
    /// Number of blocks.
    #[arg(long, default_value_t = 8)]
    pub blocks: usize,
    /// Largest index k the weights are evaluated at.
    #[arg(long, default_value_t = 1 << 26)]
    pub horizon: u64,
    /// One summary row per block instead of every entry.
    #[arg(long)]
    pub summary: bool,
}

#[derive(Debug, Clone, Args)]
pub struct AcceptArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
}
