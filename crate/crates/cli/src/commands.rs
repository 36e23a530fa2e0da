use std::path::Path;
use std::time::Instant;

use lazynn::data::{Dataset, FoldPlan, Normalizer, Task};
use lazynn::dimreduce::{intrinsic_dimension, pca_spectrum, rank_features, wrapper_cv, zero_coverage, Criterion};
use lazynn::index::{Index, IndexConfig, IndexKind, NeighbourIndex, NeighbourList};
use lazynn::instsel::{cnn, crr_ordered, enn, is_consistent, renn};
use lazynn::learner::{
    classify, evaluate_cv, mean_recall, KnnConfig, KnnModel, RegressionMode, RegressionWeighting,
};
use lazynn::metrics::{ncd, Compressor, Deflate};
use lazynn::synth;
use lazynn::xmetrics::{dtw, emd_euclidean};
use serde_json::{json, Map, Value};

use crate::input;
use crate::params::*;
use crate::report::{write_atomic, Report, RunManifest};
use crate::{row, Failure};

type Rows = Vec<Map<String, Value>>;

struct Outcome {
    description: &'static str,
    timing_fields: Vec<&'static str>,
    summary: Value,
    rows: Rows,
}

pub fn execute(command: &'static str, plan: Plan, out: &Path) -> Result<Report, Failure> {
    let o = match &plan {
        Plan::Bench(p) => bench_index(p)?,
        Plan::Classify(p) => classify_cmd(p)?,
        Plan::Featsel(p) => featsel(p)?,
        Plan::Instsel(p) => instsel(p, out)?,
        Plan::Dim(p) => dim(p)?,
        Plan::Dtw(p) => dtw_cmd(p)?,
        Plan::Emd(p) => emd_cmd(p)?,
        Plan::Ncd(p) => ncd_cmd(p)?,
        Plan::Synth(p) => synth_cmd(p, out)?,
    };
    Ok(Report {
        description: o.description,
        manifest: RunManifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            parameters: plan,
        },
        timing_fields: o.timing_fields,
        summary: o.summary,
        rows: o.rows,
    })
}

fn require_classification(data: &Dataset, what: &str) -> Result<(), Failure> {
    if data.schema().task() == Task::Regression {
        return Err(Failure::runtime(format!("{what} needs a classification dataset")));
    }
    Ok(())
}

/// Per fold: normalise on the training part, then build and query every index
/// on identical data. Brute force is the reference for recall and time.
fn bench_index(p: &BenchParams) -> Result<Outcome, Failure> {
    let data = input::load(&p.data, p.schema.as_deref())?;
    require_classification(&data, "bench-index")?;
    if p.indexes.iter().any(|k| *k != IndexKind::Brute) && !data.schema().is_all_numeric() {
        return Err(Failure::runtime("tree indexes need all-numeric features"));
    }
    let plan = FoldPlan::stratified(&data, p.folds, p.seed)?;
    let mut rows = Rows::new();
    // (build, query, accuracy sum, recall sum) per index kind
    let mut totals = vec![(0.0, 0.0, 0.0, 0.0); p.indexes.len()];
    for fold in 0..p.folds {
        let train = data.subset(&plan.train_indices(fold));
        let test = data.subset(&plan.test_indices(fold));
        let start = Instant::now();
        let norm = Normalizer::fit(&train);
        let train = norm.apply(&train)?;
        let queries = norm.apply_matrix(test.values())?;
        let normalise_secs = start.elapsed().as_secs_f64();
        let metric = p.metric.clone().for_dataset(&train)?;

        let mut reference: Vec<NeighbourList> = Vec::new();
        for (slot, &kind) in p.indexes.iter().enumerate() {
            let cfg = IndexConfig {
                kind,
                leaf_size: p.leaf_size,
                n_trees: p.trees,
                budget: p.budget,
                seed: p.seed,
            };
            let start = Instant::now();
            let index = Index::build(&cfg, train.values().clone(), metric.clone())?;
            let build_secs = start.elapsed().as_secs_f64();
            let start = Instant::now();
            let lists = queries
                .iter_rows()
                .map(|q| index.knn(q, p.k))
                .collect::<lazynn::Result<Vec<_>>>()?;
            let query_secs = start.elapsed().as_secs_f64();
            let mut hits = 0;
            for (list, &truth) in lists.iter().zip(test.labels()) {
                if classify(list, train.labels(), train.n_classes(), p.scheme)?.label == truth {
                    hits += 1;
                }
            }
            let accuracy = hits as f64 / test.len() as f64;
            if kind == IndexKind::Brute {
                reference = lists.clone();
            }
            let recall = mean_recall(&reference, &lists);
            let t = &mut totals[slot];
            *t = (t.0 + build_secs, t.1 + query_secs, t.2 + accuracy, t.3 + recall);
            rows.push(row!(
                "fold" => fold,
                "index" => kind.name(),
                "n_train" => train.len(),
                "n_test" => test.len(),
                "normalise_secs" => normalise_secs,
                "build_secs" => build_secs,
                "query_secs" => query_secs,
                "total_secs" => build_secs + query_secs,
                "accuracy" => accuracy,
                "recall" => recall,
            ));
        }
    }
    let base = (totals[0].0 + totals[0].1).max(f64::MIN_POSITIVE);
    let folds = p.folds as f64;
    let per_index: Vec<Value> = p
        .indexes
        .iter()
        .zip(&totals)
        .map(|(k, t)| {
            json!({
                "index": k.name(),
                "builds": p.folds,
                "build_secs": t.0,
                "query_secs": t.1,
                "total_secs": t.0 + t.1,
                "normalised_time": (t.0 + t.1) / base,
                "mean_accuracy": t.2 / folds,
                "mean_recall": t.3 / folds,
            })
        })
        .collect();
    Ok(Outcome {
        description: "Index build and query times per fold, with totals normalised to brute-force search",
        timing_fields: vec!["normalise_secs", "build_secs", "query_secs", "total_secs", "normalised_time"],
        summary: json!({ "n": data.len(), "dim": data.dim(), "indexes": per_index }),
        rows,
    })
}

fn knn_config(metric: &lazynn::metrics::MetricConfig, k: usize, index: IndexConfig, scheme: lazynn::learner::VotingScheme) -> KnnConfig {
    KnnConfig::new(metric.clone(), k).with_index(index).with_scheme(scheme)
}

fn classify_cmd(p: &ClassifyParams) -> Result<Outcome, Failure> {
    let cfg = knn_config(&p.metric, p.k, p.index, p.scheme);
    let timing = vec!["build_secs", "query_secs"];
    let Some(test_path) = &p.test else {
        let data = input::load(&p.data, p.schema.as_deref())?;
        let plan = FoldPlan::stratified(&data, p.folds, p.seed)?;
        let report = evaluate_cv(&data, &plan, &cfg)?;
        let rows = report
            .folds
            .iter()
            .map(|f| {
                let mut r = row!(
                    "fold" => f.fold,
                    "n_train" => f.n_train,
                    "n_test" => f.n_test,
                    "build_secs" => f.build_secs,
                    "query_secs" => f.query_secs,
                );
                f.accuracy.map(|a| r.insert("accuracy".into(), json!(a)));
                f.rmse.map(|e| r.insert("rmse".into(), json!(e)));
                r
            })
            .collect();
        return Ok(Outcome {
            description: "k-NN accuracy under stratified cross-validation",
            timing_fields: timing,
            summary: json!({
                "n": data.len(),
                "folds": p.folds,
                "mean_accuracy": report.mean_accuracy,
                "mean_rmse": report.mean_rmse,
            }),
            rows,
        });
    };
    let (train, test) = input::load_pair(&p.data, test_path, p.schema.as_deref())?;
    let start = Instant::now();
    let model = KnnModel::fit(&train, &cfg)?;
    let build_secs = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let mut r = row!("n_train" => train.len(), "n_test" => test.len(), "build_secs" => build_secs);
    let mut summary = json!({ "n_train": train.len(), "n_test": test.len() });
    if let Some(targets) = test.targets() {
        let mut sq = 0.0;
        for (i, t) in targets.iter().enumerate() {
            let y = model.predict_value(test.row(i), RegressionWeighting::Uniform, RegressionMode::Normalised)?;
            sq += (y - t) * (y - t);
        }
        let rmse = (sq / test.len() as f64).sqrt();
        r.insert("rmse".into(), json!(rmse));
        summary["rmse"] = json!(rmse);
    } else {
        let preds = model.predict_all(test.values())?;
        let hits = preds.iter().zip(test.labels()).filter(|(p, t)| p.label == **t).count();
        let accuracy = hits as f64 / test.len() as f64;
        r.insert("accuracy".into(), json!(accuracy));
        summary["accuracy"] = json!(accuracy);
    }
    r.insert("query_secs".into(), json!(start.elapsed().as_secs_f64()));
    Ok(Outcome {
        description: "k-NN accuracy on a hold-out set",
        timing_fields: timing,
        summary,
        rows: vec![r],
    })
}

fn class_id(data: &Dataset, name: Option<&str>) -> Result<usize, Failure> {
    match name {
        Some(n) => data
            .classes()
            .iter()
            .position(|c| c == n)
            .ok_or_else(|| Failure::runtime(format!("--class '{n}' is not one of {:?}", data.classes()))),
        // binary data: the second class seen is the positive one
        None if data.n_classes() == 2 => Ok(1),
        None => Err(Failure::runtime("--class is required unless the dataset has exactly two classes")),
    }
}

fn featsel(p: &FeatselParams) -> Result<Outcome, Failure> {
    let data = input::load(&p.data, p.schema.as_deref())?;
    require_classification(&data, "featsel")?;
    let names: Vec<String> = data.schema().features().iter().map(|f| f.name.clone()).collect();
    if p.criterion == FeatCriterion::Wrapper {
        let plan = FoldPlan::stratified(&data, p.folds, p.seed)?;
        let cfg = KnnConfig::new(p.metric.clone(), p.k).with_scheme(p.scheme);
        let search = wrapper_cv(&data, &plan, &cfg, p.direction)?;
        let rows = search
            .history
            .iter()
            .map(|e| {
                let chosen: Vec<&str> = e.mask.iter().zip(&names).filter(|(m, _)| **m).map(|(_, n)| n.as_str()).collect();
                row!(
                    "round" => e.round,
                    "features" => chosen.join(";"),
                    "n_features" => chosen.len(),
                    "cv_accuracy" => e.score,
                    "accepted" => e.accepted,
                )
            })
            .collect();
        let selected: Vec<&String> = search.selected().into_iter().map(|i| &names[i]).collect();
        return Ok(Outcome {
            description: "Greedy wrapper search scored by cross-validated k-NN accuracy",
            timing_fields: vec![],
            summary: json!({
                "direction": search.direction,
                "selected": selected,
                "cv_accuracy": search.score,
                "evaluations": search.history.len(),
            }),
            rows,
        });
    }
    let top_n = p.top_n.expect("validated");
    let criterion = match p.criterion {
        FeatCriterion::Ig => Criterion::Ig,
        FeatCriterion::Or => Criterion::OrClass(class_id(&data, p.class.as_deref())?),
        _ => Criterion::OrNonclass(class_id(&data, p.class.as_deref())?),
    };
    let ranked = rank_features(&data, criterion, top_n)?;
    let positions: Vec<usize> = ranked.iter().map(|f| f.position).collect();
    let rows = ranked
        .iter()
        .enumerate()
        .map(|(r, f)| row!("rank" => r + 1, "feature" => f.feature, "position" => f.position, "score" => f.value))
        .collect();
    Ok(Outcome {
        description: "Filter feature ranking and the share of samples left with no selected feature",
        timing_fields: vec![],
        summary: json!({
            "criterion": criterion.name(),
            "selected": ranked.iter().map(|f| &f.feature).collect::<Vec<_>>(),
            "zero_coverage": zero_coverage(&data, &positions),
        }),
        rows,
    })
}

/// Editing runs on min-max scaled rows (as the classifier sees them); the
/// edited CSV keeps the original values.
fn instsel(p: &InstselParams, out: &Path) -> Result<Outcome, Failure> {
    let data = input::load(&p.data, p.schema.as_deref())?;
    require_classification(&data, "instsel")?;
    let scaled = Normalizer::fit(&data).apply(&data)?;
    let metric = p.metric.clone().for_dataset(&scaled)?;
    let edited = match p.alg {
        Algorithm::Cnn => cnn(&scaled, &metric, p.seed)?,
        Algorithm::Crr => crr_ordered(&scaled, &metric, p.order)?,
        Algorithm::Enn => enn(&scaled, &metric, p.k)?,
        Algorithm::Renn => renn(&scaled, &metric, p.k)?,
    };
    let consistent = is_consistent(&scaled, &metric, &edited.retained);
    let mut csv = Vec::new();
    edited.apply(&data).write_csv(&mut csv)?;
    write_atomic(&out.join("edited.csv"), &csv)?;
    write_atomic(&out.join("schema.json"), data.schema().to_json()?.as_bytes())?;
    let rows = edited
        .removals
        .iter()
        .map(|r| row!("index" => r.index, "reason" => r.reason, "round" => r.round))
        .collect();
    Ok(Outcome {
        description: "Instance selection: retained cases and the reason each removed case was dropped",
        timing_fields: vec![],
        summary: json!({
            "algorithm": edited.algorithm,
            "parameters": edited.parameters,
            "n_input": edited.n_input,
            "n_retained": edited.retained.len(),
            "retention": edited.retention(),
            "consistent": consistent,
            "edited_csv": "edited.csv",
        }),
        rows,
    })
}

fn dim(p: &DimParams) -> Result<Outcome, Failure> {
    let data = input::load(&p.data, p.schema.as_deref())?;
    let spectrum = pca_spectrum(data.numeric_values()?)?;
    let s = intrinsic_dimension(&spectrum, p.epsilon)?;
    let cumulative = spectrum.cumulative();
    let rows = spectrum
        .eigenvalues()
        .iter()
        .zip(spectrum.ratios())
        .zip(&cumulative)
        .enumerate()
        .map(|(i, ((e, r), c))| row!("component" => i + 1, "eigenvalue" => e, "ratio" => r, "cumulative" => c))
        .collect();
    Ok(Outcome {
        description: "PCA explained-variance spectrum and the intrinsic dimension it implies",
        timing_fields: vec![],
        summary: json!({
            "ambient_dimension": data.dim(),
            "epsilon": p.epsilon,
            "intrinsic_dimension": s,
        }),
        rows,
    })
}

fn dtw_cmd(p: &PairParams) -> Result<Outcome, Failure> {
    let a = input::read_series(&p.a)?;
    let b = input::read_series(&p.b)?;
    let (distance, path) = dtw(&a, &b, p.band)?;
    let rows = path
        .steps()
        .iter()
        .enumerate()
        .map(|(s, (i, j))| row!("step" => s, "i" => i, "j" => j))
        .collect();
    Ok(Outcome {
        description: "Dynamic time warping distance and the optimal warping path",
        timing_fields: vec![],
        summary: json!({
            "distance": distance,
            "len_a": a.values().len(),
            "len_b": b.values().len(),
            "path_length": path.steps().len(),
        }),
        rows,
    })
}

fn emd_cmd(p: &PairParams) -> Result<Outcome, Failure> {
    let a = input::read_signature(&p.a)?;
    let b = input::read_signature(&p.b)?;
    let (distance, flow) = emd_euclidean(&a, &b)?;
    let rows = flow
        .nonzero()
        .into_iter()
        .map(|(j, k, f)| row!("from" => j, "to" => k, "flow" => f))
        .collect();
    Ok(Outcome {
        description: "Earth mover's distance with a Euclidean ground distance and its optimal flow",
        timing_fields: vec![],
        summary: json!({
            "distance": distance,
            "total_flow": flow.total(),
            "clusters_a": a.len(),
            "clusters_b": b.len(),
        }),
        rows,
    })
}

fn ncd_cmd(p: &PairParams) -> Result<Outcome, Failure> {
    let a = input::read_bytes(&p.a)?;
    let b = input::read_bytes(&p.b)?;
    let c = Deflate::default();
    let denominator = p.denominator.unwrap_or_default();
    let value = ncd(&a, &b, &c, denominator)?;
    let ab = [a.as_slice(), b.as_slice()].concat();
    let mut rows = Rows::new();
    for (name, bytes) in [("a", &a), ("b", &b), ("ab", &ab)] {
        rows.push(row!("input" => name, "bytes" => bytes.len(), "compressed" => c.compressed_len(bytes)?));
    }
    Ok(Outcome {
        description: "Normalised compression distance under DEFLATE",
        timing_fields: vec![],
        summary: json!({ "ncd": value, "denominator": denominator, "level": c.level }),
        rows,
    })
}

fn synth_cmd(p: &SynthParams, out: &Path) -> Result<Outcome, Failure> {
    let data = match p.kind {
        SynthKind::Blobs => {
            let clean = synth::two_blobs(p.n, p.dim, p.separation, p.seed);
            if p.noise > 0.0 {
                synth::flip_labels(&clean, p.noise, p.seed.wrapping_add(1)).0
            } else {
                clean
            }
        }
        SynthKind::Uniform => Dataset::from_numeric(synth::uniform(p.n, p.dim, p.seed), vec![0; p.n])?,
        SynthKind::Lowrank => Dataset::from_numeric(synth::low_rank(p.n, p.dim, p.rank, p.seed), vec![0; p.n])?,
        SynthKind::Planted => {
            let rare = (p.dim / 4).max(1);
            let layout = synth::PlantedLayout {
                rare_pure: rare,
                common_weak: rare,
                noise: p.dim - 2 * rare,
            };
            synth::planted_binary(p.n, layout, p.seed)
        }
    };
    let mut csv = Vec::new();
    data.write_csv(&mut csv)?;
    write_atomic(&out.join("data.csv"), &csv)?;
    write_atomic(&out.join("schema.json"), data.schema().to_json()?.as_bytes())?;
    let rows = data
        .class_counts()
        .iter()
        .zip(data.classes())
        .map(|(n, c)| row!("class" => c, "count" => n))
        .collect();
    Ok(Outcome {
        description: "Seeded synthetic dataset",
        timing_fields: vec![],
        summary: json!({ "n": data.len(), "dim": data.dim(), "files": ["data.csv", "schema.json"] }),
        rows,
    })
}
