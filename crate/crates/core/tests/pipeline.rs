use lazynn::data::{Dataset, Feature, FeatureSchema, FoldPlan};
use lazynn::index::{IndexConfig, IndexKind};
use lazynn::learner::{evaluate_cv, KnnConfig, VotingScheme};
use lazynn::metrics::{MetricConfig, MetricKind};
use lazynn::synth;

#[test]
fn csv_round_trip_and_mixed_features() {
    let schema = FeatureSchema::new(
        vec![Feature::numeric("size"), Feature::categorical("colour")],
        "kind",
    )
    .unwrap();
    let mut csv = String::from("size,colour,kind\n");
    for i in 0..60 {
        let (colour, kind) = if i % 2 == 0 { ("red", "apple") } else { ("green", "pear") };
        csv.push_str(&format!("{},{colour},{kind}\n", 1.0 + (i % 7) as f64));
    }
    let data = Dataset::read_csv(csv.as_bytes(), &schema).unwrap();
    assert_eq!(data.classes(), &["apple".to_string(), "pear".to_string()]);

    let mut out = Vec::new();
    data.write_csv(&mut out).unwrap();
    let again = Dataset::read_csv(out.as_slice(), &schema).unwrap();
    assert_eq!(again.values(), data.values());
    assert_eq!(again.labels(), data.labels());

    // colour decides the class, so the overlap metric classifies perfectly
    let metric = MetricConfig::new(MetricKind::Heterogeneous).unwrap();
    let folds = FoldPlan::stratified(&data, 5, 1).unwrap();
    let report = evaluate_cv(&data, &folds, &KnnConfig::new(metric, 3)).unwrap();
    assert_eq!(report.mean_accuracy, Some(1.0));
}

#[test]
fn cross_validation_is_deterministic_and_index_independent() {
    let data = synth::two_blobs(400, 3, 3.0, 7);
    let folds = FoldPlan::stratified(&data, 4, 42).unwrap();
    let base = KnnConfig::new(MetricConfig::euclidean(), 5).with_scheme(VotingScheme::inverse(1.0).unwrap());
    let first = evaluate_cv(&data, &folds, &base).unwrap();
    assert!(first.same_outcome(&evaluate_cv(&data, &folds, &base).unwrap()));
    for kind in [IndexKind::Kd, IndexKind::Ball] {
        let cfg = base.clone().with_index(IndexConfig::new(kind));
        let r = evaluate_cv(&data, &folds, &cfg).unwrap();
        assert_eq!(r.accuracies(), first.accuracies(), "{}", kind.name());
    }
    assert!(first.mean_accuracy.unwrap() > 0.85);
}

#[test]
fn regression_reports_rmse() {
    let x = synth::uniform(200, 1, 3);
    let targets: Vec<f64> = x.iter_rows().map(|r| 3.0 * r[0]).collect();
    let data = Dataset::regression(FeatureSchema::numeric(1).unwrap(), x, targets).unwrap();
    let folds = FoldPlan::stratified(&data, 5, 0).unwrap();
    let r = evaluate_cv(&data, &folds, &KnnConfig::new(MetricConfig::euclidean(), 3)).unwrap();
    assert!(r.mean_accuracy.is_none());
    assert!(r.mean_rmse.unwrap() < 0.1);
}
