use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "lazynn",
    version,
    about = "Nearest-neighbour experiments: index timing, classification, feature and instance selection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time brute-force, kd-tree and ball-tree search per fold, normalised to brute force
    BenchIndex,
    /// Cross-validated (or hold-out, with --test) k-NN classification
    Classify,
    /// Rank features by information gain or odds ratio, or run a wrapper search
    Featsel,
    /// Edit a training set with CNN, CRR, ENN or RENN
    Instsel,
    /// PCA spectrum and intrinsic dimension
    Dim,
    /// Dynamic time warping between two series files
    Dtw { a: PathBuf, b: PathBuf },
    /// Earth mover's distance between two JSON signatures
    Emd { a: PathBuf, b: PathBuf },
    /// Normalised compression distance between two files
    Ncd { a: PathBuf, b: PathBuf },
    /// Write a seeded synthetic dataset and its schema
    Synth,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::BenchIndex => "bench-index",
            Command::Classify => "classify",
            Command::Featsel => "featsel",
            Command::Instsel => "instsel",
            Command::Dim => "dim",
            Command::Dtw { .. } => "dtw",
            Command::Emd { .. } => "emd",
            Command::Ncd { .. } => "ncd",
            Command::Synth => "synth",
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct Options {
    /// Input CSV with a header row
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// JSON schema for --data; without it every column but the label is numeric
    #[arg(long, global = true)]
    pub schema: Option<PathBuf>,
    /// Hold-out CSV for classify (same header as --data)
    #[arg(long, global = true)]
    pub test: Option<PathBuf>,
    /// RNG seed [default: 42]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cross-validation folds
    #[arg(long, global = true)]
    pub folds: Option<usize>,
    /// Neighbours per query
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// euclidean, manhattan, minkowski, chebyshev, heterogeneous, cosine, pearson, spearman
    #[arg(long, global = true)]
    pub metric: Option<String>,
    /// Minkowski exponent (with --metric minkowski)
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// brute, kd, ball or rp; bench-index takes a comma-separated list
    #[arg(long, global = true)]
    pub index: Option<String>,
    #[arg(long, global = true)]
    pub leaf_size: Option<usize>,
    /// rp-forest tree count
    #[arg(long, global = true)]
    pub trees: Option<usize>,
    /// rp-forest candidate budget per query
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// majority, exponential, inverse or inverse:P
    #[arg(long, global = true)]
    pub scheme: Option<String>,
    /// ig, or, or-nonclass or wrapper
    #[arg(long, global = true)]
    pub criterion: Option<String>,
    /// Class name the odds ratio is computed for
    #[arg(long, global = true)]
    pub class: Option<String>,
    #[arg(long, global = true)]
    pub top_n: Option<usize>,
    /// forward or backward (wrapper search)
    #[arg(long, global = true)]
    pub direction: Option<String>,
    /// cnn, crr, enn or renn
    #[arg(long, global = true)]
    pub alg: Option<String>,
    /// CRR coverage order: ascending or descending
    #[arg(long, global = true)]
    pub order: Option<String>,
    /// Unexplained-variance tolerance for dim [default: 0.05]
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Sakoe-Chiba band width for dtw
    #[arg(long, global = true)]
    pub band: Option<usize>,
    /// NCD denominator: min or max
    #[arg(long, global = true)]
    pub denominator: Option<String>,
    /// synth generator: blobs, uniform, lowrank or planted
    #[arg(long, global = true)]
    pub kind: Option<String>,
    /// synth sample count
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// synth dimension
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// synth lowrank latent rank
    #[arg(long, global = true)]
    pub rank: Option<usize>,
    /// synth blobs centre distance
    #[arg(long, global = true)]
    pub separation: Option<f64>,
    /// synth blobs fraction of flipped labels
    #[arg(long, global = true)]
    pub noise: Option<f64>,
    /// Output directory for report.json and report.csv [default: lazynn-out]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}
