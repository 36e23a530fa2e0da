//! Seeded synthetic datasets standing in for the benchmark corpora.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{Dataset, Matrix};

/// `n × d` matrix of independent U[0, 1) values.
pub fn uniform(n: usize, d: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::new((0..n * d).map(|_| rng.random::<f64>()).collect(), d).expect("shape is consistent")
}

/// Two isotropic unit-variance Gaussian classes of `n / 2` (class 0) and
/// `n − n / 2` (class 1) samples. The centres sit `separation` apart along
/// the main diagonal.
pub fn two_blobs(n: usize, d: usize, separation: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift = separation / (d as f64).sqrt();
    let mut values = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = usize::from(i >= n / 2);
        for _ in 0..d {
            let z: f64 = StandardNormal.sample(&mut rng);
            values.push(z + shift * class as f64);
        }
        labels.push(class);
    }
    let m = Matrix::new(values, d).expect("shape is consistent");
    Dataset::from_numeric(m, labels).expect("two classes, non-empty")
}

/// Flips the labels of `round(fraction · n)` distinct random samples to a
/// different class. Returns the noisy dataset and the flipped row indices,
/// sorted.
pub fn flip_labels(data: &Dataset, fraction: f64, seed: u64) -> (Dataset, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = data.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut flipped: Vec<usize> = order[..((fraction * n as f64).round() as usize).min(n)].to_vec();
    flipped.sort_unstable();
    let c = data.n_classes().max(2);
    let mut labels = data.labels().to_vec();
    for &i in &flipped {
        labels[i] = (labels[i] + 1 + rng.random_range(0..c - 1)) % c;
    }
    let noisy = data.with_labels(labels).expect("labels stay in range");
    (noisy, flipped)
}

/// Rank-`rank` Gaussian data isometrically embedded in `d` dimensions. The
/// latent coordinates have standard deviations `1, 0.8, 0.64, …` so every
/// latent direction carries a visible share of the variance.
pub fn low_rank(n: usize, d: usize, rank: usize, seed: u64) -> Matrix {
    assert!(rank <= d, "rank cannot exceed the ambient dimension");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = orthonormal_rows(rank, d, &mut rng);
    let mut values = vec![0.0; n * d];
    for row in values.chunks_mut(d) {
        for (r, b) in basis.iter().enumerate() {
            let z: f64 = StandardNormal.sample(&mut rng);
            let z = z * 0.8f64.powi(r as i32);
            for (v, e) in row.iter_mut().zip(b) {
                *v += z * e;
            }
        }
    }
    Matrix::new(values, d).expect("shape is consistent")
}

/// `rows` random orthonormal vectors in `d` dimensions (Gram–Schmidt).
pub fn orthonormal_rows(rows: usize, d: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(rows);
    while basis.len() < rows {
        let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut *rng)).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis
}

/// Layout of [`planted_binary`]: feature columns in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlantedLayout {
    pub rare_pure: usize,
    pub common_weak: usize,
    pub noise: usize,
}

impl PlantedLayout {
    pub fn rare_range(&self) -> std::ops::Range<usize> {
        0..self.rare_pure
    }

    pub fn common_range(&self) -> std::ops::Range<usize> {
        self.rare_pure..self.rare_pure + self.common_weak
    }

    pub fn dim(&self) -> usize {
        self.rare_pure + self.common_weak + self.noise
    }
}

/// Binary presence/absence data for two balanced classes, in the style of
/// bag-of-words features:
///
/// * rare-pure features occur in 2% of class-1 samples and never in class 0;
/// * common-weak features occur in 85% of class 1 and 65% of class 0;
/// * noise features occur in 30% of samples regardless of class.
pub fn planted_binary(n: usize, layout: PlantedLayout, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = layout.dim();
    let mut values = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let positive = i % 2 == 1;
        for f in 0..d {
            let p = if layout.rare_range().contains(&f) {
                if positive { 0.02 } else { 0.0 }
            } else if layout.common_range().contains(&f) {
                if positive { 0.85 } else { 0.65 }
            } else {
                0.3
            };
            values.push(if rng.random::<f64>() < p { 1.0 } else { 0.0 });
        }
        labels.push(usize::from(positive));
    }
    let m = Matrix::new(values, d).expect("shape is consistent");
    Dataset::from_numeric(m, labels).expect("two classes, non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blobs_are_balanced_and_seeded() {
        let a = two_blobs(101, 3, 4.0, 1);
        assert_eq!(a.class_counts(), vec![50, 51]);
        assert_eq!(a.values(), two_blobs(101, 3, 4.0, 1).values());
    }

    #[test]
    fn flips_change_exactly_the_reported_rows() {
        let clean = two_blobs(200, 2, 4.0, 2);
        let (noisy, flipped) = flip_labels(&clean, 0.1, 3);
        assert_eq!(flipped.len(), 20);
        for i in 0..200 {
            assert_eq!(clean.labels()[i] != noisy.labels()[i], flipped.contains(&i));
        }
    }

    #[test]
    fn orthonormal_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let b = orthonormal_rows(3, 6, &mut rng);
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = b[i].iter().zip(&b[j]).map(|(x, y)| x * y).sum();
                assert!((dot - f64::from(u8::from(i == j))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn planted_rare_features_are_pure() {
        let layout = PlantedLayout { rare_pure: 3, common_weak: 3, noise: 2 };
        let data = planted_binary(2000, layout, 4);
        for i in 0..data.len() {
            if data.labels()[i] == 0 {
                assert!(layout.rare_range().all(|f| data.row(i)[f] == 0.0));
            }
        }
    }
}
