use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::data::Matrix;
use crate::error::{Error, Result};

/// Cumulative sums within this of the target count as reaching it.
const CUMULATIVE_SLACK: f64 = 1e-9;

/// Explained-variance ratios of the principal components, largest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalSpectrum {
    ratios: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl PrincipalSpectrum {
    /// Wraps given ratios after checking they are non-negative,
    /// non-increasing and sum to 1.
    pub fn from_ratios(ratios: Vec<f64>) -> Result<Self> {
        if ratios.is_empty() {
            return Err(Error::EmptyInput);
        }
        if ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::param("ratios", "ratios must be finite and non-negative"));
        }
        if ratios.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::param("ratios", "ratios must be non-increasing"));
        }
        let sum: f64 = ratios.iter().sum();
        if (sum - 1.0).abs() > CUMULATIVE_SLACK {
            return Err(Error::param("ratios", format!("ratios sum to {sum}, not 1")));
        }
        Ok(PrincipalSpectrum {
            eigenvalues: ratios.clone(),
            ratios,
        })
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    /// Covariance eigenvalues (component variances), largest first.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn cumulative(&self) -> Vec<f64> {
        self.ratios
            .iter()
            .scan(0.0, |acc, r| {
                *acc += r;
                Some(*acc)
            })
            .collect()
    }
}

/// Eigen-decomposition of the sample covariance of `data` (rows are
/// samples). Keeps `min(n, p)` components.
pub fn pca_spectrum(data: &Matrix) -> Result<PrincipalSpectrum> {
    let (n, p) = (data.rows(), data.cols());
    if n < 2 {
        return Err(Error::param("samples", "PCA needs at least two samples"));
    }
    let mut centred = DMatrix::from_row_slice(n, p, data.as_slice());
    for j in 0..p {
        let mean = centred.column(j).mean();
        centred.column_mut(j).add_scalar_mut(-mean);
    }
    let cov = centred.transpose() * &centred / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut values: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values.truncate(n.min(p));
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let ratios = values.iter().map(|v| v / total).collect();
    Ok(PrincipalSpectrum {
        ratios,
        eigenvalues: values,
    })
}

/// Smallest component count whose cumulative ratio reaches `1 − epsilon`.
pub fn intrinsic_dimension(spectrum: &PrincipalSpectrum, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param("epsilon", format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    let target = 1.0 - epsilon;
    let cum = spectrum.cumulative();
    Ok(cum
        .iter()
        .position(|&c| c >= target - CUMULATIVE_SLACK)
        .map_or(cum.len(), |i| i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn low_rank_data_has_two_components() {
        let s = pca_spectrum(&synth::low_rank(500, 10, 2, 1)).unwrap();
        assert_eq!(s.ratios().len(), 10);
        assert!((s.ratios()[0] + s.ratios()[1] - 1.0).abs() < 1e-9);
        assert_eq!(intrinsic_dimension(&s, 0.05).unwrap(), 2);
    }

    #[test]
    fn cumulative_thresholds() {
        let s = PrincipalSpectrum::from_ratios(vec![0.7, 0.2, 0.05, 0.05]).unwrap();
        assert_eq!(intrinsic_dimension(&s, 0.1).unwrap(), 2);
        assert_eq!(intrinsic_dimension(&s, 0.05).unwrap(), 3);
        assert!(intrinsic_dimension(&s, 0.0).is_err());
        assert!(intrinsic_dimension(&s, 1.0).is_err());
    }

    #[test]
    fn isotropic_gaussian_is_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v: Vec<f64> = (0..30_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = pca_spectrum(&Matrix::new(v, 3).unwrap()).unwrap();
        assert!(s.ratios().iter().all(|r| (r - 1.0 / 3.0).abs() < 0.02), "{:?}", s.ratios());
    }

    #[test]
    fn duplicating_a_column_never_lowers_the_top_ratio() {
        let m = synth::uniform(200, 4, 3);
        let rows: Vec<Vec<f64>> = m.iter_rows().map(|r| {
            let mut v = r.to_vec();
            v.push(r[0]);
            v
        }).collect();
        let a = pca_spectrum(&m).unwrap();
        let b = pca_spectrum(&Matrix::from_rows(&rows).unwrap()).unwrap();
        assert!(b.ratios()[0] >= a.ratios()[0]);
    }

    #[test]
    fn rotation_preserves_the_spectrum() {
        let m = synth::uniform(300, 4, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = synth::orthonormal_rows(4, 4, &mut rng);
        let rows: Vec<Vec<f64>> = m
            .iter_rows()
            .map(|r| q.iter().map(|b| b.iter().zip(r).map(|(x, y)| x * y).sum()).collect())
            .collect();
        let a = pca_spectrum(&m).unwrap();
        let b = pca_spectrum(&Matrix::from_rows(&rows).unwrap()).unwrap();
        for (x, y) in a.ratios().iter().zip(b.ratios()) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn invariants_and_errors() {
        let s = pca_spectrum(&synth::uniform(50, 6, 6)).unwrap();
        assert!(s.ratios().windows(2).all(|w| w[0] >= w[1]));
        assert!((s.ratios().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(pca_spectrum(&synth::uniform(1, 3, 0)).is_err());
        assert!(matches!(
            pca_spectrum(&Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap()),
            Err(Error::ZeroVariance)
        ));
        assert!(PrincipalSpectrum::from_ratios(vec![0.2, 0.8]).is_err());
    }
}
