use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reclab::torus::DEFAULT_MIN_DENOMINATOR;

#[derive(Debug, Parser)]
#[command(name = "rlab", version, about = "Multiple-recurrence laboratory: exact and sampled correlation analyses")]
pub struct Cli {
    /// Worker thread cap (also read from RLAB_THREADS).
    #[arg(long, env = "RLAB_THREADS", global = true)]
    pub threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; each command has its own default.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct SeriesArgs {
    /// builtin:flip, builtin:triple, builtin:rot:<angles> or a JSON system file.
    #[arg(long)]
    pub system: String,
    /// Set spec: a named set from the system file, `distinct`, cylinder
    /// constraints like `x0=0,c1.x2=1`, or arcs like `0..1/2`.
    #[arg(long)]
    pub set: String,
    /// Comma-separated maps, `id` for the identity; defaults per system.
    #[arg(long)]
    pub maps: Option<String>,
    /// Inclusive range `a..b` of iterates.
    #[arg(long = "n", value_name = "A..B")]
    pub range: String,
    #[arg(long, default_value_t = DEFAULT_MIN_DENOMINATOR)]
    pub min_den: i64,
    /// Override the symbolic backend's per-atom cell limit.
    #[arg(long)]
    pub cell_limit: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitClass {
    Rotation,
    RotationDoubling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Plain,
    Antithetic,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Correlation series n ↦ μ(∩ T_i^{-n} A).
    Corr(SeriesArgs),
    /// Hits of μ(∩ T_i^{-n} A) > μ(A)^power − ε with gap report.
    Khintchine {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, default_value = "1/100")]
        eps: String,
        /// Defaults to the number of maps.
        #[arg(long)]
        power: Option<u32>,
    },
    /// Furstenberg–Katznelson constant over windows of a fixed length.
    Fk {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long)]
        window: i64,
    },
    /// Exact window averages of the correlation series.
    Average {
        #[command(flatten)]
        series: SeriesArgs,
        /// Windows `M..N` (half-open), comma-separated.
        #[arg(long)]
        windows: Option<String>,
        /// Report the sup deviation from the target over all windows of this length.
        #[arg(long)]
        len: Option<i64>,
        /// Defaults to the product of the set measures.
        #[arg(long)]
        target: Option<String>,
        /// Run the dyadic convergence probe.
        #[arg(long)]
        probe: bool,
    },
    /// Empirical joining over a window with exact checks.
    Joining {
        #[arg(long)]
        system: String,
        #[arg(long)]
        maps: Option<String>,
        /// Partition spec per map (`;`-separated), or one spec for all:
        /// `x0`, `c1.x2`, `equal:4`, `cuts:0,1/3`.
        #[arg(long)]
        partition: String,
        /// Half-open window `M..N`.
        #[arg(long)]
        window: String,
        #[arg(long, default_value_t = DEFAULT_MIN_DENOMINATOR)]
        min_den: i64,
    },
    /// Orbit diameters of a rotation tuple.
    Diam {
        #[arg(long)]
        angles: String,
        #[arg(long = "N")]
        horizon: i64,
        /// Include n^{1/k}-scaled columns.
        #[arg(long)]
        scaled: bool,
        #[arg(long, default_value_t = DEFAULT_MIN_DENOMINATOR)]
        min_den: i64,
    },
    /// Exhaustive simultaneous Dirichlet minimum.
    Dirichlet {
        #[arg(long)]
        angles: String,
        #[arg(long = "N")]
        horizon: i64,
        #[arg(long, default_value_t = DEFAULT_MIN_DENOMINATOR)]
        min_den: i64,
    },
    /// Compact/weakly-mixing split of a grid observable.
    Jdlg {
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        /// x-arcs of a box indicator.
        #[arg(long, default_value = "0..1/2")]
        ax: String,
        /// y-arcs of a box indicator.
        #[arg(long, default_value = "0..1/2")]
        ay: String,
        /// Read the observable from a CSV grid instead of a box.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = SplitClass::RotationDoubling)]
        class: SplitClass,
        /// Write the compact part as a CSV grid.
        #[arg(long)]
        export_compact: Option<PathBuf>,
    },
    /// Van der Corput surrogate on product averages of x ↦ x+ω, y ↦ 2y.
    Vdc {
        #[arg(long, default_value = "sqrt2-1")]
        angle: String,
        /// Add a rotation factor x ↦ x + ω' carrying 1/2 + cos(2πx)/2.
        #[arg(long)]
        second: Option<String>,
        #[arg(long, default_value_t = 1 << 16)]
        grid: usize,
        #[arg(long, default_value_t = 1 << 12)]
        window: i64,
        #[arg(long = "H", default_value_t = 64)]
        h: usize,
        #[arg(long, default_value_t = DEFAULT_MIN_DENOMINATOR)]
        min_den: i64,
    },
    /// Eigenvalue return times {n : max |λ^n − 1| < δ/(3a)}.
    Eigen {
        #[arg(long)]
        angles: String,
        #[arg(long, default_value = "1")]
        a: String,
        #[arg(long)]
        delta: String,
        #[arg(long = "N")]
        horizon: i64,
        #[arg(long, default_value_t = DEFAULT_MIN_DENOMINATOR)]
        min_den: i64,
    },
    /// Monte Carlo estimates of the correlation series or a window average.
    Mc {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        burn_in: usize,
        #[arg(long, value_enum, default_value_t = EstimatorArg::Plain)]
        estimator: EstimatorArg,
        /// Estimate the average over this half-open window instead of a series.
        #[arg(long)]
        window: Option<String>,
    },
    /// Parse and validate a JSON report.
    ValidateReport { path: PathBuf },
    /// Execute a JSON run spec `{command, system, params, output}`.
    Run { spec: PathBuf },
}
