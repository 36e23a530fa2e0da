//! Flag validation. Every problem is collected before anything runs, so a bad
//! invocation reports all of its mistakes at once.

use std::path::{Path, PathBuf};

use lazynn::dimreduce::Direction;
use lazynn::index::{IndexConfig, IndexKind, DEFAULT_LEAF_SIZE};
use lazynn::instsel::CoverageOrder;
use lazynn::learner::VotingScheme;
use lazynn::metrics::{MetricConfig, MetricKind, NcdDenominator};
use serde::Serialize;

use crate::cli::{Command, Options};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_EPSILON: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct Issue {
    pub flag: String,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct Issues(pub Vec<Issue>);

impl Issues {
    pub fn push(&mut self, flag: &str, message: impl Into<String>) {
        self.0.push(Issue {
            flag: flag.to_owned(),
            message: message.into(),
        });
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchParams {
    pub data: PathBuf,
    pub schema: Option<PathBuf>,
    pub folds: usize,
    pub k: usize,
    pub metric: MetricConfig,
    pub indexes: Vec<IndexKind>,
    pub leaf_size: usize,
    pub trees: usize,
    pub budget: usize,
    pub scheme: VotingScheme,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyParams {
    pub data: PathBuf,
    pub schema: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub folds: usize,
    pub k: usize,
    pub metric: MetricConfig,
    pub index: IndexConfig,
    pub scheme: VotingScheme,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatCriterion {
    Ig,
    Or,
    OrNonclass,
    Wrapper,
}

#[derive(Debug, Clone, Serialize)]
pub struct FeatselParams {
    pub data: PathBuf,
    pub schema: Option<PathBuf>,
    pub criterion: FeatCriterion,
    pub class: Option<String>,
    pub top_n: Option<usize>,
    pub direction: Direction,
    pub folds: usize,
    pub k: usize,
    pub metric: MetricConfig,
    pub scheme: VotingScheme,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Cnn,
    Crr,
    Enn,
    Renn,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstselParams {
    pub data: PathBuf,
    pub schema: Option<PathBuf>,
    pub alg: Algorithm,
    pub k: usize,
    pub order: CoverageOrder,
    pub metric: MetricConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DimParams {
    pub data: PathBuf,
    pub schema: Option<PathBuf>,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairParams {
    pub a: PathBuf,
    pub b: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub denominator: Option<NcdDenominator>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    Blobs,
    Uniform,
    Lowrank,
    Planted,
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthParams {
    pub kind: SynthKind,
    pub n: usize,
    pub dim: usize,
    pub rank: usize,
    pub separation: f64,
    pub noise: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Plan {
    Bench(BenchParams),
    Classify(ClassifyParams),
    Featsel(FeatselParams),
    Instsel(InstselParams),
    Dim(DimParams),
    Dtw(PairParams),
    Emd(PairParams),
    Ncd(PairParams),
    Synth(SynthParams),
}

/// Resolves defaults and checks every flag relevant to `command`.
pub fn plan(command: &Command, o: &Options) -> Result<Plan, Vec<Issue>> {
    let mut v = Issues::default();
    let seed = o.seed.unwrap_or(DEFAULT_SEED);
    let plan = match command {
        Command::BenchIndex => {
            let kinds = index_list(&mut v, o.index.as_deref());
            let metric = metric(&mut v, o);
            Plan::Bench(BenchParams {
                data: input(&mut v, "--data", o.data.as_deref(), true).unwrap_or_default(),
                schema: input(&mut v, "--schema", o.schema.as_deref(), false),
                folds: at_least(&mut v, "--folds", o.folds, 10, 2),
                k: at_least(&mut v, "--k", o.k, 1, 1),
                metric,
                indexes: kinds,
                leaf_size: at_least(&mut v, "--leaf-size", o.leaf_size, DEFAULT_LEAF_SIZE, 1),
                trees: at_least(&mut v, "--trees", o.trees, 10, 1),
                budget: at_least(&mut v, "--budget", o.budget, 400, 1),
                scheme: scheme(&mut v, o.scheme.as_deref()),
                seed,
            })
        }
        Command::Classify => {
            let kind = match o.index.as_deref().map(str::parse::<IndexKind>) {
                None => IndexKind::Brute,
                Some(Ok(k)) => k,
                Some(Err(_)) => {
                    v.push("--index", index_message(o.index.as_deref().unwrap_or_default()));
                    IndexKind::Brute
                }
            };
            let index = IndexConfig {
                kind,
                leaf_size: at_least(&mut v, "--leaf-size", o.leaf_size, DEFAULT_LEAF_SIZE, 1),
                n_trees: at_least(&mut v, "--trees", o.trees, 10, 1),
                budget: at_least(&mut v, "--budget", o.budget, 400, 1),
                seed,
            };
            let test = input(&mut v, "--test", o.test.as_deref(), false);
            Plan::Classify(ClassifyParams {
                data: input(&mut v, "--data", o.data.as_deref(), true).unwrap_or_default(),
                schema: input(&mut v, "--schema", o.schema.as_deref(), false),
                folds: at_least(&mut v, "--folds", o.folds, 10, 2),
                test,
                k: at_least(&mut v, "--k", o.k, 1, 1),
                metric: metric(&mut v, o),
                index,
                scheme: scheme(&mut v, o.scheme.as_deref()),
                seed,
            })
        }
        Command::Featsel => {
            let criterion = match o.criterion.as_deref().unwrap_or("ig") {
                "ig" => FeatCriterion::Ig,
                "or" => FeatCriterion::Or,
                "or-nonclass" => FeatCriterion::OrNonclass,
                "wrapper" => FeatCriterion::Wrapper,
                other => {
                    v.push(
                        "--criterion",
                        format!("unknown criterion '{other}'; expected ig, or, or-nonclass or wrapper"),
                    );
                    FeatCriterion::Ig
                }
            };
            let top_n = match (criterion, o.top_n) {
                (FeatCriterion::Wrapper, Some(_)) => {
                    v.push("--top-n", "does not apply to the wrapper search, which sizes the subset itself");
                    None
                }
                (FeatCriterion::Wrapper, None) => None,
                (_, None) => {
                    v.push("--top-n", "is required for filter criteria (the number of features to keep)");
                    None
                }
                (_, Some(0)) => {
                    v.push("--top-n", "must be >= 1; got 0");
                    None
                }
                (_, Some(n)) => Some(n),
            };
            let direction = match o.direction.as_deref().map(str::parse::<Direction>) {
                None => Direction::Forward,
                Some(Ok(d)) => d,
                Some(Err(_)) => {
                    v.push("--direction", "expected forward or backward");
                    Direction::Forward
                }
            };
            Plan::Featsel(FeatselParams {
                data: input(&mut v, "--data", o.data.as_deref(), true).unwrap_or_default(),
                schema: input(&mut v, "--schema", o.schema.as_deref(), false),
                criterion,
                class: o.class.clone(),
                top_n,
                direction,
                folds: at_least(&mut v, "--folds", o.folds, 5, 2),
                k: at_least(&mut v, "--k", o.k, 1, 1),
                metric: metric(&mut v, o),
                scheme: scheme(&mut v, o.scheme.as_deref()),
                seed,
            })
        }
        Command::Instsel => {
            let alg = match o.alg.as_deref() {
                Some("cnn") => Algorithm::Cnn,
                Some("crr") => Algorithm::Crr,
                Some("enn") => Algorithm::Enn,
                Some("renn") => Algorithm::Renn,
                Some(other) => {
                    v.push("--alg", format!("unknown algorithm '{other}'; expected cnn, crr, enn or renn"));
                    Algorithm::Crr
                }
                None => {
                    v.push("--alg", "is required: cnn, crr, enn or renn");
                    Algorithm::Crr
                }
            };
            let order = match o.order.as_deref() {
                None | Some("ascending") => CoverageOrder::Ascending,
                Some("descending") => CoverageOrder::Descending,
                Some(other) => {
                    v.push("--order", format!("unknown order '{other}'; expected ascending or descending"));
                    CoverageOrder::Ascending
                }
            };
            Plan::Instsel(InstselParams {
                data: input(&mut v, "--data", o.data.as_deref(), true).unwrap_or_default(),
                schema: input(&mut v, "--schema", o.schema.as_deref(), false),
                alg,
                k: at_least(&mut v, "--k", o.k, 3, 1),
                order,
                metric: metric(&mut v, o),
                seed,
            })
        }
        Command::Dim => {
            let epsilon = o.epsilon.unwrap_or(DEFAULT_EPSILON);
            if !(epsilon > 0.0 && epsilon < 1.0) {
                v.push("--epsilon", format!("must lie in the open interval (0, 1); got {epsilon}"));
            }
            Plan::Dim(DimParams {
                data: input(&mut v, "--data", o.data.as_deref(), true).unwrap_or_default(),
                schema: input(&mut v, "--schema", o.schema.as_deref(), false),
                epsilon,
            })
        }
        Command::Dtw { a, b } => Plan::Dtw(PairParams {
            a: input(&mut v, "a", Some(a), true).unwrap_or_default(),
            b: input(&mut v, "b", Some(b), true).unwrap_or_default(),
            band: o.band,
            denominator: None,
        }),
        Command::Emd { a, b } => Plan::Emd(PairParams {
            a: input(&mut v, "a", Some(a), true).unwrap_or_default(),
            b: input(&mut v, "b", Some(b), true).unwrap_or_default(),
            band: None,
            denominator: None,
        }),
        Command::Ncd { a, b } => {
            let denominator = match o.denominator.as_deref() {
                None | Some("min") => NcdDenominator::Min,
                Some("max") => NcdDenominator::Max,
                Some(other) => {
                    v.push("--denominator", format!("unknown denominator '{other}'; expected min or max"));
                    NcdDenominator::Min
                }
            };
            Plan::Ncd(PairParams {
                a: input(&mut v, "a", Some(a), true).unwrap_or_default(),
                b: input(&mut v, "b", Some(b), true).unwrap_or_default(),
                band: None,
                denominator: Some(denominator),
            })
        }
        Command::Synth => {
            let kind = match o.kind.as_deref().unwrap_or("blobs") {
                "blobs" => SynthKind::Blobs,
                "uniform" => SynthKind::Uniform,
                "lowrank" => SynthKind::Lowrank,
                "planted" => SynthKind::Planted,
                other => {
                    v.push("--kind", format!("unknown generator '{other}'; expected blobs, uniform, lowrank or planted"));
                    SynthKind::Blobs
                }
            };
            let default_dim = match kind {
                SynthKind::Blobs => 2,
                SynthKind::Uniform => 8,
                SynthKind::Lowrank => 10,
                SynthKind::Planted => 20,
            };
            let min_dim = if kind == SynthKind::Planted { 3 } else { 1 };
            let dim = at_least(&mut v, "--dim", o.dim, default_dim, min_dim);
            let rank = at_least(&mut v, "--rank", o.rank, 2.min(dim), 1);
            if rank > dim {
                v.push("--rank", format!("must not exceed --dim ({dim}); got {rank}"));
            }
            let separation = o.separation.unwrap_or(4.0);
            if !(separation.is_finite() && separation >= 0.0) {
                v.push("--separation", format!("must be finite and >= 0; got {separation}"));
            }
            let noise = o.noise.unwrap_or(0.0);
            if !(0.0..=1.0).contains(&noise) {
                v.push("--noise", format!("must lie in [0, 1]; got {noise}"));
            }
            Plan::Synth(SynthParams {
                kind,
                n: at_least(&mut v, "--n", o.n, 1000, 2),
                dim,
                rank,
                separation,
                noise,
                seed,
            })
        }
    };
    if v.0.is_empty() {
        Ok(plan)
    } else {
        Err(v.0)
    }
}

fn input(v: &mut Issues, flag: &str, path: Option<&Path>, required: bool) -> Option<PathBuf> {
    match path {
        None => {
            if required {
                v.push(flag, "is required");
            }
            None
        }
        Some(p) if !p.is_file() => {
            v.push(flag, format!("file not found: {}", p.display()));
            None
        }
        Some(p) => Some(p.to_path_buf()),
    }
}

fn at_least(v: &mut Issues, flag: &str, value: Option<usize>, default: usize, min: usize) -> usize {
    let x = value.unwrap_or(default);
    if x < min {
        v.push(flag, format!("must be >= {min}; got {x}"));
    }
    x
}

fn metric(v: &mut Issues, o: &Options) -> MetricConfig {
    let name = o.metric.as_deref().unwrap_or("euclidean");
    if o.p.is_some() && name != "minkowski" {
        v.push("--p", format!("applies only to --metric minkowski, not '{name}'"));
    }
    let kind = match name {
        "euclidean" => MetricKind::Minkowski { p: 2.0 },
        "manhattan" => MetricKind::Minkowski { p: 1.0 },
        "minkowski" => MetricKind::Minkowski { p: o.p.unwrap_or(2.0) },
        "chebyshev" => MetricKind::Chebyshev,
        "heterogeneous" => MetricKind::Heterogeneous,
        "cosine" => MetricKind::Cosine,
        "pearson" => MetricKind::Pearson,
        "spearman" => MetricKind::Spearman,
        other => {
            v.push(
                "--metric",
                format!(
                    "unknown metric '{other}'; expected euclidean, manhattan, minkowski, chebyshev, \
                     heterogeneous, cosine, pearson or spearman"
                ),
            );
            return MetricConfig::euclidean();
        }
    };
    MetricConfig::new(kind).unwrap_or_else(|_| {
        v.push("--p", format!("must be >= 1 (or infinite); got {}", o.p.unwrap_or_default()));
        MetricConfig::euclidean()
    })
}

fn scheme(v: &mut Issues, s: Option<&str>) -> VotingScheme {
    match s.map(str::parse::<VotingScheme>) {
        None => VotingScheme::Majority,
        Some(Ok(s)) => s,
        Some(Err(e)) => {
            v.push("--scheme", format!("{e}; expected majority, exponential, inverse or inverse:P with P >= 1"));
            VotingScheme::Majority
        }
    }
}

fn index_message(s: &str) -> String {
    format!("unknown index '{s}'; expected brute, kd, ball or rp")
}

/// Comma-separated kinds; brute force always runs first as the reference.
fn index_list(v: &mut Issues, s: Option<&str>) -> Vec<IndexKind> {
    let mut kinds = vec![IndexKind::Brute];
    let list = s.unwrap_or("brute,kd,ball");
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.parse::<IndexKind>() {
            Ok(k) if !kinds.contains(&k) => kinds.push(k),
            Ok(_) => {}
            Err(_) => v.push("--index", index_message(part)),
        }
    }
    kinds
}
