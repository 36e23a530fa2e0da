use super::vector::{check_lengths, ScoreKind, SimilarityScore};
use crate::error::{Error, Result};

fn check_pair(q: &[f64], x: &[f64]) -> Result<()> {
    check_lengths(q, x)?;
    if q.len() < 2 {
        return Err(Error::param("length", "correlation needs at least two values"));
    }
    Ok(())
}

#[inline]
pub(crate) fn pearson_unchecked(q: &[f64], x: &[f64]) -> Option<f64> {
    let n = q.len() as f64;
    let mq = q.iter().sum::<f64>() / n;
    let mx = x.iter().sum::<f64>() / n;
    let (mut sxy, mut sqq, mut sxx) = (0.0, 0.0, 0.0);
    for (a, b) in q.iter().zip(x) {
        let (da, db) = (a - mq, b - mx);
        sxy += da * db;
        sqq += da * da;
        sxx += db * db;
    }
    if sqq == 0.0 || sxx == 0.0 {
        return None;
    }
    Some((sxy / (sqq.sqrt() * sxx.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlation of two equal-length vectors.
pub fn pearson(q: &[f64], x: &[f64]) -> Result<SimilarityScore> {
    check_pair(q, x)?;
    let r = pearson_unchecked(q, x).ok_or(Error::ZeroVariance)?;
    SimilarityScore::new(r, ScoreKind::Correlation)
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && v[order[end]] == v[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let mean = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = mean;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation: Pearson over average ranks.
pub fn spearman(q: &[f64], x: &[f64]) -> Result<SimilarityScore> {
    check_pair(q, x)?;
    pearson(&average_ranks(q), &average_ranks(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_anticorrelation() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap().value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_vector_errors() {
        assert!(matches!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::ZeroVariance)));
        assert!(matches!(spearman(&[2.0, 2.0], &[1.0, 2.0]), Err(Error::ZeroVariance)));
        assert!(pearson(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn tie_ranks() {
        assert_eq!(average_ranks(&[1.0, 2.0, 2.0, 3.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(average_ranks(&[5.0, 5.0, 5.0]), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn spearman_rank_invariance() {
        let x = [0.3, 1.7, -2.0, 4.5, 0.9];
        let y: Vec<f64> = x.iter().map(|v: &f64| v.powi(3) + v.exp()).collect();
        assert!((spearman(&x, &y).unwrap().value - 1.0).abs() < 1e-12);
        let rev: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((spearman(&x, &rev).unwrap().value + 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn pearson_affine_invariant(
            x in prop::collection::vec(-100.0f64..100.0, 3..20),
            a in 0.01f64..50.0,
            b in -50.0f64..50.0,
        ) {
            let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            if let Ok(r) = pearson(&x, &y) {
                prop_assert!((r.value - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn pearson_in_range(
            pair in (2usize..15).prop_flat_map(|n| (
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(-10.0f64..10.0, n),
            )),
        ) {
            if let Ok(r) = pearson(&pair.0, &pair.1) {
                prop_assert!((-1.0..=1.0).contains(&r.value));
            }
        }
    }
}
