use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gwel::entropy_lab::DEFAULT_MEMORY_GUARD;
use gwel::quotients::DEFAULT_MAX_COSETS;

use crate::parse::parse_seed;
use crate::report::Format;

const RANK_HELP: &str = "Rank d of the free group F_d (2..=26)";
const COSETS_HELP: &str = "Abort coset enumeration beyond this many cosets";
const GUARD_HELP: &str = "Cap on dense DP cells and exact supports";

#[derive(Debug, Parser)]
#[command(
    name = "gwel",
    version = crate::report::tool_version(),
    about = "Entropy, drift, growth and boundary calculus for random walks on free groups",
    after_help = "All logarithms are natural; reports carry \"units\": \"nats\".\n\
                  Exit codes: 0 ok, 1 I/O failure, 2 bad parameters, 3 resource guard, 4 non-convergence."
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Seed for every random stream (decimal or 0x-hex)
    #[arg(long, global = true, default_value = "0xD0DD5", value_parser = parse_seed)]
    pub seed: u64,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; the GWEL_THREADS environment variable takes precedence
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Report format; CSV holds the series, or the summary when there is none
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Transfer,
    Brute,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// H(mu^n) of the simple random walk, on F_d or on a quotient
    WalkEntropy(WalkEntropyArgs),
    /// Monte Carlo drift |w_n|/n
    Drift(DriftArgs),
    /// Ball counts |B(n)| of F_d
    Growth(GrowthArgs),
    /// Kernel sphere counts and critical exponent of a finite quotient
    Cogrowth(CogrowthArgs),
    /// Entropy gap between F_d and a quotient against the critical exponent
    GapCheck(GapCheckArgs),
    /// The inequality h <= drift * growth with exact h and v and a sampled drift
    Guivarch(DriftArgs),
    /// Entropy level of the quotient-boundary family
    TheoremA(TheoremAArgs),
    /// Furstenberg entropy of the hitting measure on the tree boundary
    BoundaryEntropy(BoundaryEntropyArgs),
    /// Mass that w_n pushes onto the cylinder of its own k-prefix
    Proximality(ProximalityArgs),
    /// Partition-chain experiment described by a config file
    LatticeExperiment(LatticeArgs),
}

#[derive(Debug, Args)]
pub struct WalkEntropyArgs {
    #[arg(long, default_value_t = 2, help = RANK_HELP)]
    pub rank: u16,
    /// Largest n for H(mu^n)
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// trivial | abelian | relators: w1, w2, ... | perm: a=(1 2); b=(...)
    #[arg(long)]
    pub quotient: Option<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_COSETS, help = COSETS_HELP)]
    pub max_cosets: usize,
    #[arg(long, default_value_t = DEFAULT_MEMORY_GUARD, help = GUARD_HELP)]
    pub memory_guard: usize,
}

#[derive(Debug, Args)]
pub struct DriftArgs {
    #[arg(long, default_value_t = 2, help = RANK_HELP)]
    pub rank: u16,
    /// Walk length n
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    /// Number of independent walks
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct GrowthArgs {
    #[arg(long, default_value_t = 2, help = RANK_HELP)]
    pub rank: u16,
    /// Largest radius n
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct CogrowthArgs {
    #[arg(long, default_value_t = 2, help = RANK_HELP)]
    pub rank: u16,
    /// Largest radius n for kernel sphere counts
    #[arg(long, default_value_t = 12)]
    pub steps: usize,
    /// A finite quotient: trivial | relators: ... | perm: ...
    #[arg(long)]
    pub quotient: String,
    /// Counting method for the series
    #[arg(long, value_enum, default_value_t = Method::Transfer)]
    pub method: Method,
    /// Relative tolerance of the power iteration
    #[arg(long, default_value_t = 1e-13)]
    pub tol: f64,
    /// Iteration cap of the power iteration
    #[arg(long, default_value_t = gwel::growth_cogrowth::DEFAULT_MAX_ITERATIONS)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_COSETS, help = COSETS_HELP)]
    pub max_cosets: usize,
}

#[derive(Debug, Args)]
pub struct GapCheckArgs {
    #[arg(long, default_value_t = 2, help = RANK_HELP)]
    pub rank: u16,
    /// Steps of the exact quotient entropy computation
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    /// trivial | abelian | relators: w1, w2, ... | perm: a=(1 2); b=(...)
    #[arg(long)]
    pub quotient: String,
    /// Steps whose exact support is grouped by coset
    #[arg(long, default_value_t = 6)]
    pub exact_steps: usize,
    /// Steps with kernel ball counts
    #[arg(long, default_value_t = 12)]
    pub ball_steps: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_COSETS, help = COSETS_HELP)]
    pub max_cosets: usize,
    #[arg(long, default_value_t = DEFAULT_MEMORY_GUARD, help = GUARD_HELP)]
    pub memory_guard: usize,
}

#[derive(Debug, Args)]
pub struct TheoremAArgs {
    #[arg(long, default_value_t = 3, help = RANK_HELP)]
    pub rank: u16,
}

#[derive(Debug, Args)]
pub struct BoundaryEntropyArgs {
    #[arg(long, default_value_t = 2, help = RANK_HELP)]
    pub rank: u16,
    /// Step measure as word:prob pairs, e.g. "a:1/2, A:1/2"; `1` is the
    /// identity. Defaults to the simple random walk, computed exactly.
    #[arg(long)]
    pub measure: Option<String>,
}

#[derive(Debug, Args)]
pub struct ProximalityArgs {
    #[arg(long, default_value_t = 2, help = RANK_HELP)]
    pub rank: u16,
    /// Walk length n
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    /// Prefix depth k
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    /// Number of walks
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Mass every walk should reach
    #[arg(long, default_value_t = 0.999)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    /// Experiment description; see the README for the format
    #[arg(long)]
    pub config: PathBuf,
}
