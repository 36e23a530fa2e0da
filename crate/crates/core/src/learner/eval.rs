use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::voting::{classify, regress, Prediction, RegressionMode, RegressionWeighting, VotingScheme};
use crate::data::{Dataset, FoldPlan, Matrix, Normalizer, Task};
use crate::error::{Error, Result};
use crate::index::{Index, IndexConfig, IndexKind, NeighbourIndex, NeighbourList};
use crate::metrics::MetricConfig;

/// Everything needed to fit a k-NN model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnConfig {
    pub metric: MetricConfig,
    pub index: IndexConfig,
    pub k: usize,
    pub scheme: VotingScheme,
    /// Min–max scale features using the training rows only.
    pub normalize: bool,
}

impl KnnConfig {
    pub fn new(metric: MetricConfig, k: usize) -> Self {
        KnnConfig {
            metric,
            index: IndexConfig::default(),
            k,
            scheme: VotingScheme::Majority,
            normalize: true,
        }
    }

    pub fn with_index(mut self, index: IndexConfig) -> Self {
        self.index = index;
        self
    }

    pub fn with_scheme(mut self, scheme: VotingScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_normalize(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::param("k", "k must be >= 1"));
        }
        self.scheme.validate()
    }
}

/// A fitted lazy learner: the (optionally normalised) training rows behind
/// an index, plus their labels or targets.
pub struct KnnModel {
    normalizer: Option<Normalizer>,
    index: Index,
    labels: Vec<usize>,
    n_classes: usize,
    targets: Option<Vec<f64>>,
    k: usize,
    scheme: VotingScheme,
}

impl KnnModel {
    pub fn fit(train: &Dataset, config: &KnnConfig) -> Result<KnnModel> {
        config.validate()?;
        let (normalizer, rows) = if config.normalize {
            let norm = Normalizer::fit(train);
            let scaled = norm.apply(train)?;
            (Some(norm), scaled)
        } else {
            (None, train.clone())
        };
        let metric = config.metric.clone().for_dataset(&rows)?;
        let index = Index::build(&config.index, rows.values().clone(), metric)?;
        Ok(KnnModel {
            normalizer,
            index,
            labels: train.labels().to_vec(),
            n_classes: train.n_classes(),
            targets: train.targets().map(<[f64]>::to_vec),
            k: config.k,
            scheme: config.scheme,
        })
    }

    pub fn index(&self) -> &Index {
        &self.index
    }

    pub fn neighbours(&self, row: &[f64]) -> Result<NeighbourList> {
        match &self.normalizer {
            Some(n) => self.index.knn(&n.apply_row(row)?, self.k),
            None => self.index.knn(row, self.k),
        }
    }

    pub fn predict(&self, row: &[f64]) -> Result<Prediction> {
        classify(&self.neighbours(row)?, &self.labels, self.n_classes, self.scheme)
    }

    pub fn predict_all(&self, rows: &Matrix) -> Result<Vec<Prediction>> {
        let rows: Vec<&[f64]> = rows.iter_rows().collect();
        rows.par_iter().map(|r| self.predict(r)).collect()
    }

    /// Neighbour-weighted target estimate; needs a regression training set.
    pub fn predict_value(&self, row: &[f64], weighting: RegressionWeighting, mode: RegressionMode) -> Result<f64> {
        let targets = self
            .targets
            .as_deref()
            .ok_or_else(|| Error::param("targets", "model was fitted without regression targets"))?;
        regress(&self.neighbours(row)?, targets, weighting, mode)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Fraction of test rows classified correctly (classification).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    /// Root mean squared error of the normalised weighted mean (regression).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse: Option<f64>,
    pub build_secs: f64,
    pub query_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: KnnConfig,
    pub k_folds: usize,
    pub seed: u64,
    pub folds: Vec<FoldReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_rmse: Option<f64>,
}

impl EvalReport {
    pub fn accuracies(&self) -> Vec<f64> {
        self.folds.iter().filter_map(|f| f.accuracy).collect()
    }

    /// Equal up to wall-clock timings.
    pub fn same_outcome(&self, other: &EvalReport) -> bool {
        let strip = |r: &EvalReport| {
            let mut r = r.clone();
            r.folds.iter_mut().for_each(|f| {
                f.build_secs = 0.0;
                f.query_secs = 0.0;
            });
            r
        };
        strip(self) == strip(other)
    }
}

/// k-fold evaluation: per fold, fit the normaliser and index on the training
/// part and predict every test row.
pub fn evaluate_cv(data: &Dataset, folds: &FoldPlan, config: &KnnConfig) -> Result<EvalReport> {
    config.validate()?;
    if folds.len() != data.len() {
        return Err(Error::DimensionMismatch {
            expected: data.len(),
            found: folds.len(),
        });
    }
    let regression = data.schema().task() == Task::Regression;
    let mut reports = Vec::with_capacity(folds.k_folds());
    for fold in 0..folds.k_folds() {
        let report = run_fold(data, folds, config, fold, regression).map_err(|e| Error::Fold {
            fold,
            source: Box::new(e),
        })?;
        reports.push(report);
    }
    let mean = |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    let mean_accuracy = mean(reports.iter().filter_map(|r| r.accuracy).collect());
    let mean_rmse = mean(reports.iter().filter_map(|r| r.rmse).collect());
    Ok(EvalReport {
        config: config.clone(),
        k_folds: folds.k_folds(),
        seed: folds.seed(),
        folds: reports,
        mean_accuracy,
        mean_rmse,
    })
}

fn run_fold(data: &Dataset, folds: &FoldPlan, config: &KnnConfig, fold: usize, regression: bool) -> Result<FoldReport> {
    let train = data.subset(&folds.train_indices(fold));
    let test = data.subset(&folds.test_indices(fold));

    let start = Instant::now();
    let model = KnnModel::fit(&train, config)?;
    let build_secs = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let rows: Vec<&[f64]> = test.values().iter_rows().collect();
    let (accuracy, rmse) = if regression {
        let truth = test.targets().expect("regression dataset has targets");
        let preds: Vec<f64> = rows
            .par_iter()
            .map(|r| model.predict_value(r, RegressionWeighting::Uniform, RegressionMode::Normalised))
            .collect::<Result<_>>()?;
        let mse = preds.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / preds.len() as f64;
        (None, Some(mse.sqrt()))
    } else {
        let preds: Vec<usize> = rows
            .par_iter()
            .map(|r| model.predict(r).map(|p| p.label))
            .collect::<Result<_>>()?;
        let correct = preds.iter().zip(test.labels()).filter(|(p, t)| p == t).count();
        (Some(correct as f64 / preds.len() as f64), None)
    };
    let query_secs = start.elapsed().as_secs_f64();

    Ok(FoldReport {
        fold,
        n_train: train.len(),
        n_test: test.len(),
        accuracy,
        rmse,
        build_secs,
        query_secs,
    })
}

/// Single-threaded build and query timing for one index kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexTiming {
    pub index: IndexKind,
    pub build_secs: f64,
    pub query_secs: f64,
    /// `(build + query)` over the brute-force `(build + query)`.
    pub normalised: f64,
    /// Mean recall@k against brute force (1.0 for exact indexes).
    pub recall: f64,
}

/// Times each index kind on the same queries, relative to a linear scan.
/// Queries run sequentially so the ratios compare algorithms, not thread
/// counts.
pub fn compare_indexes(
    train: &Matrix,
    queries: &Matrix,
    metric: &MetricConfig,
    configs: &[IndexConfig],
    k: usize,
) -> Result<Vec<IndexTiming>> {
    let run = |cfg: &IndexConfig| -> Result<(f64, f64, Vec<NeighbourList>)> {
        let start = Instant::now();
        let index = Index::build(cfg, train.clone(), metric.clone())?;
        let build = start.elapsed().as_secs_f64();
        let start = Instant::now();
        let out = queries.iter_rows().map(|q| index.knn(q, k)).collect::<Result<Vec<_>>>()?;
        Ok((build, start.elapsed().as_secs_f64(), out))
    };
    let (bb, bq, exact) = run(&IndexConfig::new(IndexKind::Brute))?;
    let base = (bb + bq).max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(configs.len());
    for cfg in configs {
        let (build, query, found) = if cfg.kind == IndexKind::Brute {
            (bb, bq, exact.clone())
        } else {
            run(cfg)?
        };
        out.push(IndexTiming {
            index: cfg.kind,
            build_secs: build,
            query_secs: query,
            normalised: (build + query) / base,
            recall: mean_recall(&exact, &found),
        });
    }
    Ok(out)
}

/// Fraction of true neighbour indices recovered, averaged over queries.
pub fn mean_recall(exact: &[NeighbourList], found: &[NeighbourList]) -> f64 {
    if exact.is_empty() {
        return 1.0;
    }
    let total: f64 = exact
        .iter()
        .zip(found)
        .map(|(e, f)| {
            let truth = e.indices();
            let hits = f.indices().iter().filter(|i| truth.contains(i)).count();
            hits as f64 / truth.len().max(1) as f64
        })
        .sum();
    total / exact.len() as f64
}
