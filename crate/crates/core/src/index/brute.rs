use super::{check_build, check_query, KBest, NeighbourIndex, NeighbourList};
use crate::data::Matrix;
use crate::error::Result;
use crate::metrics::Distance;

/// Linear scan over every stored row. Works with any [`Distance`],
/// metric or not, and serves as the oracle for the tree indexes.
pub struct BruteForce<D> {
    data: Matrix,
    metric: D,
}

impl<D: Distance> BruteForce<D> {
    pub fn new(data: Matrix, metric: D) -> Result<Self> {
        check_build(&data, 1)?;
        Ok(BruteForce { data, metric })
    }

    pub fn data(&self) -> &Matrix {
        &self.data
    }

    pub fn metric(&self) -> &D {
        &self.metric
    }
}

impl<D: Distance> NeighbourIndex for BruteForce<D> {
    fn knn(&self, q: &[f64], k: usize) -> Result<NeighbourList> {
        check_query(q, k, self.data.cols())?;
        let mut best = KBest::new(k);
        for (i, row) in self.data.iter_rows().enumerate() {
            best.push(self.metric.distance(q, row), i);
        }
        Ok(best.into_list(|d| d))
    }

    fn len(&self) -> usize {
        self.data.rows()
    }

    fn dim(&self) -> usize {
        self.data.cols()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MetricConfig;
    use crate::xmetrics::Dtw;

    fn grid() -> Matrix {
        Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 3.0]]).unwrap()
    }

    #[test]
    fn single_point() {
        let b = BruteForce::new(Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap(), MetricConfig::euclidean())
            .unwrap();
        let r = b.knn(&[4.0, 5.0], 3).unwrap();
        assert_eq!(r.indices(), vec![0]);
        assert_eq!(r.distances(), vec![5.0]);
    }

    #[test]
    fn k_equal_n_returns_everything_sorted() {
        let b = BruteForce::new(grid(), MetricConfig::euclidean()).unwrap();
        let r = b.knn(&[0.0, 0.0], 4).unwrap();
        assert_eq!(r.indices(), vec![0, 1, 2, 3]);
        assert!(r.distances().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn errors() {
        let b = BruteForce::new(grid(), MetricConfig::euclidean()).unwrap();
        assert!(b.knn(&[0.0, 0.0], 0).is_err());
        assert!(b.knn(&[0.0], 1).is_err());
    }

    #[test]
    fn accepts_non_metrics() {
        let b = BruteForce::new(grid(), Dtw::default()).unwrap();
        assert_eq!(b.knn(&[0.0, 0.0], 1).unwrap().indices(), vec![0]);
    }
}
