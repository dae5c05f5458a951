use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use swnet::metrics::MessageMode;
use swnet::routing::NavigationLevel;
use swnet::topology::{InterlacingScheme, NetworkKind};

/// Default output directory when `--out` is not given.
pub const OUT_ENV: &str = "SWNET_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "swnet",
    version,
    about = "Small-world torus interconnect simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one network (best of --samples) and write its text form.
    Generate(Shared),
    /// Route a message set and report l2, u/M, f_max and the load histogram.
    Evaluate(EvaluateArgs),
    /// Print the navigation diameter.
    Diameter(NetworkArgs),
    /// Failure sweep over the configured b values.
    Sweep(Shared),
    /// Inject b failures and run the overload cascade to its fixed point.
    Cascade(CascadeArgs),
    /// Write the CSV series behind a figure.
    Figure(FigureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Desk,
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct Shared {
    /// Lattice side L.
    #[arg(long)]
    pub size: Option<u32>,
    /// torus, stochastic, stochastic-fixed or ibt.
    #[arg(long)]
    pub kind: Option<NetworkKind>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// iBT short bypass length (needs --s2).
    #[arg(long, requires = "s2")]
    pub s1: Option<u32>,
    /// iBT long bypass length (needs --s1).
    #[arg(long, requires = "s1")]
    pub s2: Option<u32>,
    /// ring-matching or parity-bypass.
    #[arg(long)]
    pub scheme: Option<InterlacingScheme>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Config file (`swnet-config v1`); flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// desk (the defaults, L=64) or full (L=128, 100 samples, 10^6 sampled messages).
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Output path; defaults to $SWNET_OUT, else standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// all-pairs, sample:M or sample:M:seed.
    #[arg(long)]
    pub messages: Option<MessageMode>,
    /// Navigation level, 1 or 2.
    #[arg(long)]
    pub level: Option<NavigationLevel>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Candidate networks for best-sample selection.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Failure draws per b.
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// Comma-separated failed-node counts.
    #[arg(long, conflicts_with = "b_fractions")]
    pub b: Option<String>,
    /// Comma-separated failed-node fractions of N.
    #[arg(long)]
    pub b_fractions: Option<String>,
    /// Hop limit; default twice the navigation diameter.
    #[arg(long)]
    pub hop_limit: Option<u32>,
    /// Assurance factor k, threshold k * f_max of the intact iBT network.
    #[arg(long)]
    pub cascade_k: Option<f64>,
    #[arg(long)]
    pub max_rounds: Option<usize>,
    /// Histogram bin width.
    #[arg(long)]
    pub bin_width: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct NetworkArgs {
    #[command(flatten)]
    pub shared: Shared,
    /// Read the network from this file instead of generating it.
    #[arg(long)]
    pub network: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    /// Also compute the exact global average distance d.
    #[arg(long)]
    pub distance: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CascadeArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    /// Initially failed nodes.
    #[arg(long = "failed", default_value_t = 0)]
    pub failed: usize,
    /// Absolute load threshold instead of --cascade-k.
    #[arg(long, conflicts_with = "cascade_k")]
    pub threshold: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[command(flatten)]
    pub shared: Shared,
    /// Figure number 1 to 5; repeatable. Default all.
    #[arg(long = "figure", value_parser = clap::value_parser!(u8).range(1..=5))]
    pub figures: Vec<u8>,
}
