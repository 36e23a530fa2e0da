use lazynn::data::Matrix;
use lazynn::index::{BallTree, BruteForce, Index, IndexConfig, IndexKind, KdTree, NeighbourIndex};
use lazynn::metrics::{Distance, MetricConfig, MetricKind};
use lazynn::synth;
use proptest::prelude::*;

fn metrics() -> Vec<MetricConfig> {
    vec![
        MetricConfig::new(MetricKind::Minkowski { p: 1.0 }).unwrap(),
        MetricConfig::euclidean(),
        MetricConfig::new(MetricKind::Minkowski { p: 3.0 }).unwrap(),
        MetricConfig::new(MetricKind::Chebyshev).unwrap(),
        MetricConfig::euclidean().with_weights(vec![2.0, 0.5, 1.0, 0.0]).unwrap(),
    ]
}

#[test]
fn exact_indexes_agree_for_every_lp_metric() {
    let data = synth::uniform(600, 4, 1);
    let queries = synth::uniform(40, 4, 2);
    for metric in metrics() {
        let brute = BruteForce::new(data.clone(), metric.clone()).unwrap();
        let kd = KdTree::build(data.clone(), &metric, 8).unwrap();
        let ball = BallTree::build(data.clone(), metric.clone(), 8, 3).unwrap();
        for q in queries.iter_rows() {
            let want = brute.knn(q, 7).unwrap();
            assert_eq!(kd.knn(q, 7).unwrap().distances(), want.distances(), "{}", metric.name());
            assert_eq!(ball.knn(q, 7).unwrap().distances(), want.distances(), "{}", metric.name());
        }
    }
}

#[test]
fn kd_tree_prunes_in_low_dimension() {
    let data = synth::uniform(5000, 3, 3);
    let kd = KdTree::build(data.clone(), &MetricConfig::euclidean(), 16).unwrap();
    let queries = synth::uniform(50, 3, 4);
    let mut evals = 0;
    for q in queries.iter_rows() {
        evals += kd.knn_with_stats(q, 5).unwrap().1.distance_evals;
    }
    assert!(evals < 50 * 5000 / 10, "{evals} distance evaluations");
}

#[test]
fn duplicates_and_k_larger_than_n() {
    let rows = vec![vec![1.0, 1.0]; 5];
    let data = Matrix::from_rows(&rows).unwrap();
    for kind in [IndexKind::Brute, IndexKind::Kd, IndexKind::Ball, IndexKind::Rp] {
        let index = Index::build(&IndexConfig::new(kind), data.clone(), MetricConfig::euclidean()).unwrap();
        let list = index.knn(&[1.0, 1.0], 10).unwrap();
        assert_eq!(list.len(), 5, "{}", kind.name());
        assert_eq!(list.indices(), vec![0, 1, 2, 3, 4], "{}", kind.name());
    }
}

#[test]
fn non_metrics_are_refused() {
    let data = synth::uniform(20, 3, 5);
    let cosine = MetricConfig::new(MetricKind::Cosine).unwrap();
    assert!(BallTree::build(data.clone(), cosine.clone(), 4, 0).is_err());
    assert!(KdTree::build(data.clone(), &cosine, 4).is_err());
    assert!(BruteForce::new(data, cosine).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trees_return_the_brute_force_neighbours(
        n in 1usize..120,
        d in 1usize..6,
        k in 1usize..10,
        leaf in 1usize..12,
        seed in any::<u64>(),
    ) {
        let data = synth::uniform(n, d, seed);
        let q = synth::uniform(1, d, seed ^ 1);
        let q = q.row(0);
        let m = MetricConfig::euclidean();
        let want = BruteForce::new(data.clone(), m.clone()).unwrap().knn(q, k).unwrap();
        let kd = KdTree::build(data.clone(), &m, leaf).unwrap().knn(q, k).unwrap();
        let ball = BallTree::build(data.clone(), m.clone(), leaf, seed).unwrap().knn(q, k).unwrap();
        prop_assert_eq!(kd.distances(), want.distances());
        prop_assert_eq!(ball.distances(), want.distances());
        // every reported distance is the true distance of the reported row
        for e in kd.entries() {
            prop_assert_eq!(e.distance, m.distance(q, data.row(e.index)));
        }
    }
}
