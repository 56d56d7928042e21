//! `edgelift`: lifting transforms, denoising and simulation studies for
//! signals on network edges.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "edgelift", version, about = "Line-graph lifting wavelets for edge signals")]
pub struct Cli {
    /// Master seed for tie breaking, trajectories, graphs and noise.
    #[arg(long, global = true, env = "EDGELIFT_SEED", default_value_t = 1)]
    pub seed: u64,

    /// Where to write the run manifest. Defaults to `<output>.manifest.json`
    /// when an output file is given.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct LiftArgs {
    /// Transform variant, e.g. LG-Aid-c.
    #[arg(long, default_value = "LG-Aid-c")]
    pub variant: String,
    /// Scaling coefficients left when lifting stops.
    #[arg(long, default_value_t = 2)]
    pub tau: usize,
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Graph file (`mode graph` or `mode stations`).
    pub input: PathBuf,
    /// Values file (`vertex,id,value`) overriding the values in the graph file.
    #[arg(long)]
    pub values: Option<PathBuf>,
    /// Join disconnected station groups by nearest pairs.
    #[arg(long)]
    pub complete_links: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ShrinkArgs {
    /// Number of artificial levels; default max(3, floor(log2 m)).
    #[arg(long)]
    pub levels: Option<usize>,
    /// Coarsest levels left unthresholded.
    #[arg(long, default_value_t = 2)]
    pub keep_coarsest: usize,
    #[arg(long, value_enum, default_value_t = Rule::PosteriorMedian)]
    pub rule: Rule,
    /// Known noise standard deviation; estimated by MAD when absent.
    #[arg(long)]
    pub noise_sd: Option<f64>,
    /// Threshold raw details instead of details divided by their dual norms.
    #[arg(long)]
    pub no_normalize: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    PosteriorMedian,
    Hard,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingArg {
    Pointwise,
    EdgeAverage,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write the line graph of a source graph as a stations file.
    Linegraph {
        #[command(flatten)]
        input: InputArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Forward transform: coefficients CSV plus a JSON record for `inverse`.
    Forward {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        lift: LiftArgs,
        /// Assign this many artificial levels to the details.
        #[arg(long)]
        levels: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Lifting record, needed by `inverse`.
        #[arg(long)]
        record: PathBuf,
    },
    /// Inverse transform from a coefficients CSV and its record.
    Inverse {
        #[arg(long)]
        coefficients: PathBuf,
        #[arg(long)]
        record: PathBuf,
        /// Graph file used only to label output rows with edge ids.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Empirical-Bayes denoising along the minimum-integral order.
    Denoise {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        lift: LiftArgs,
        #[command(flatten)]
        shrink: ShrinkArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Denoising averaged over random removal orders.
    ///
    /// With `--sigma`, the input values are taken as the truth: noise is
    /// added `--reps` times and the single-order and averaged errors are
    /// compared.
    Nlt {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        lift: LiftArgs,
        #[command(flatten)]
        shrink: ShrinkArgs,
        #[arg(long, default_value_t = 30)]
        trajectories: usize,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 50)]
        reps: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Condition numbers of the forward matrix.
    ///
    /// Summarizes random networks unless a graph file is given.
    Condnum {
        /// Graph file; if absent, `--graphs` random networks are sampled.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Variants to evaluate, comma separated, or `all`.
        #[arg(long, default_value = "all")]
        variant: String,
        #[arg(long, default_value_t = 50)]
        graphs: usize,
        /// Vertices per random network.
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        tau: usize,
        /// Also write the forward matrix (single graph file only).
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Reconstruction error when keeping the largest details.
    Sparsity {
        /// Graph file with values; if absent, `--field` on random networks.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "all")]
        variant: String,
        #[arg(long, default_value = "heavisine")]
        field: String,
        #[arg(long, value_enum, default_value_t = EmbeddingArg::Pointwise)]
        embedding: EmbeddingArg,
        #[arg(long, default_value_t = 10)]
        graphs: usize,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        tau: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo denoising study over random networks.
    Simulate {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        graphs: usize,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        /// Signal-to-noise ratios, comma separated.
        #[arg(long, default_value = "3,5,7")]
        snr: String,
        #[arg(long, value_enum, default_value_t = EmbeddingArg::Pointwise)]
        embedding: EmbeddingArg,
        /// Points per edge for edge averaging.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Fields, comma separated, or `all`.
        #[arg(long, default_value = "all")]
        fields: String,
        #[arg(long, default_value = "all")]
        variant: String,
        #[command(flatten)]
        shrink: ShrinkArgs,
        /// Long-format CSV (variant, function, snr, embedding, metric, value).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Wide table of one metric (amse, var, bias2, mse_sd).
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value = "amse")]
        metric: String,
    },
    /// Write the synthetic river network with its clean flow signal.
    Flowsim {
        /// Fixture seed (independent of --seed).
        #[arg(long, default_value_t = 1)]
        fixture_seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Cluster label of each edge as `edge_id,cluster`.
        #[arg(long)]
        clusters: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let category = commands::category(&err);
            eprintln!("edgelift: error[{category}]: {err:#}");
            ExitCode::from(commands::exit_code(category))
        }
    }
}
