use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::Distance;

/// Leave-one-out 1-NN competence of every case.
///
/// Case `x` is correctly classified by its nearest other case `nn(x)` when
/// their labels agree; then `x` is in the coverage set of `nn(x)` and
/// `nn(x)` is the (only) member of the reachability set of `x`. Distance
/// ties go to the lowest index, and a case never covers itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompetenceModel {
    nearest: Vec<usize>,
    coverage: Vec<Vec<usize>>,
    reachability: Vec<Vec<usize>>,
}

impl CompetenceModel {
    pub fn build<D: Distance>(data: &Dataset, metric: &D) -> Result<Self> {
        let n = data.len();
        if n < 2 {
            return Err(Error::param("samples", "a competence model needs at least two cases"));
        }
        let nearest: Vec<usize> = (0..n)
            .into_par_iter()
            .map(|i| {
                let q = data.row(i);
                let mut best = (f64::INFINITY, usize::MAX);
                for j in (0..n).filter(|&j| j != i) {
                    let d = metric.distance(q, data.row(j));
                    if d < best.0 || best.1 == usize::MAX {
                        best = (d, j);
                    }
                }
                best.1
            })
            .collect();
        let labels = data.labels();
        let mut coverage = vec![Vec::new(); n];
        let mut reachability = vec![Vec::new(); n];
        for (x, &c) in nearest.iter().enumerate() {
            if labels[x] == labels[c] {
                coverage[c].push(x);
                reachability[x].push(c);
            }
        }
        Ok(CompetenceModel {
            nearest,
            coverage,
            reachability,
        })
    }

    pub fn len(&self) -> usize {
        self.nearest.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nearest.is_empty()
    }

    /// Leave-one-out nearest neighbour of case `i`.
    pub fn nearest(&self, i: usize) -> usize {
        self.nearest[i]
    }

    /// Cases that `i` classifies correctly.
    pub fn coverage(&self, i: usize) -> &[usize] {
        &self.coverage[i]
    }

    /// Cases that classify `i` correctly.
    pub fn reachability(&self, i: usize) -> &[usize] {
        &self.reachability[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Matrix;
    use crate::metrics::MetricConfig;

    fn ds(rows: &[Vec<f64>], labels: &[usize]) -> Dataset {
        Dataset::from_numeric(Matrix::from_rows(rows).unwrap(), labels.to_vec()).unwrap()
    }

    #[test]
    fn same_class_pair_covers_both_ways() {
        let m = CompetenceModel::build(&ds(&[vec![0.0], vec![1.0]], &[0, 0]), &MetricConfig::euclidean()).unwrap();
        assert_eq!(m.coverage(0), &[1]);
        assert_eq!(m.coverage(1), &[0]);
        assert_eq!(m.reachability(0), &[1]);
        assert_eq!(m.reachability(1), &[0]);
    }

    #[test]
    fn mixed_pair_has_empty_sets() {
        let m = CompetenceModel::build(&ds(&[vec![0.0], vec![1.0]], &[0, 1]), &MetricConfig::euclidean()).unwrap();
        for i in 0..2 {
            assert!(m.coverage(i).is_empty() && m.reachability(i).is_empty());
        }
    }

    #[test]
    fn noisy_case_in_a_foreign_cluster_covers_nothing() {
        // 19 class-0 points on a ring, one class-1 point at the centre
        let mut rows: Vec<Vec<f64>> = (0..19)
            .map(|i| {
                let t = i as f64 / 19.0 * std::f64::consts::TAU;
                vec![t.cos(), t.sin()]
            })
            .collect();
        rows.push(vec![0.0, 0.0]);
        let mut labels = vec![0; 19];
        labels.push(1);
        let data = ds(&rows, &labels);
        let m = CompetenceModel::build(&data, &MetricConfig::euclidean()).unwrap();
        assert!(m.coverage(19).is_empty());
        assert!(m.reachability(19).is_empty());
        // brute-force LOO oracle
        for x in 0..20 {
            let mut best = (f64::INFINITY, 0);
            for j in 0..20 {
                let d = MetricConfig::euclidean().distance(data.row(x), data.row(j));
                if j != x && d < best.0 {
                    best = (d, j);
                }
            }
            assert_eq!(m.nearest(x), best.1);
        }
    }

    #[test]
    fn coverage_and_reachability_are_dual() {
        let data = crate::synth::flip_labels(&crate::synth::two_blobs(300, 2, 2.0, 1), 0.1, 2).0;
        let m = CompetenceModel::build(&data, &MetricConfig::euclidean()).unwrap();
        for c in 0..300 {
            for x in 0..300 {
                assert_eq!(m.coverage(x).contains(&c), m.reachability(c).contains(&x));
            }
            assert!(!m.coverage(c).contains(&c));
        }
    }

    #[test]
    fn needs_two_cases() {
        assert!(CompetenceModel::build(&ds(&[vec![0.0]], &[0]), &MetricConfig::euclidean()).is_err());
    }
}
