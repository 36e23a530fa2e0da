use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binned distribution with non-negative bin masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    bins: Vec<f64>,
}

impl Histogram {
    pub fn new(bins: Vec<f64>) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::EmptyInput);
        }
        if bins.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::param("bins", "histogram bins must be finite and >= 0"));
        }
        Ok(Histogram { bins })
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.bins.iter().sum()
    }

    pub fn is_normalised(&self) -> bool {
        (self.total() - 1.0).abs() <= 1e-9
    }

    /// Rescaled to sum to 1.
    pub fn normalised(&self) -> Result<Histogram> {
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::param("bins", "histogram has no mass"));
        }
        Ok(Histogram {
            bins: self.bins.iter().map(|b| b / total).collect(),
        })
    }
}

fn same_len(h: &Histogram, k: &Histogram) -> Result<()> {
    if h.len() != k.len() {
        return Err(Error::DimensionMismatch {
            expected: h.len(),
            found: k.len(),
        });
    }
    Ok(())
}

/// `a · log2(a / b)` with `0 · log(0 / b) = 0`.
#[inline]
fn plogq(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * (a / b).log2()
    }
}

/// Kullback–Leibler divergence in bits. Both histograms are renormalised to
/// sum 1 first. Mass in `h` over an empty bin of `k` is an error.
pub fn kl_divergence(h: &Histogram, k: &Histogram) -> Result<f64> {
    same_len(h, k)?;
    let (h, k) = (h.normalised()?, k.normalised()?);
    let mut total = 0.0;
    for (i, (&a, &b)) in h.bins.iter().zip(&k.bins).enumerate() {
        if a > 0.0 && b == 0.0 {
            return Err(Error::InfiniteDivergence { bin: i });
        }
        total += plogq(a, b);
    }
    Ok(total.max(0.0))
}

/// Jeffrey divergence: KL of each histogram against their bin-wise mean.
/// Symmetric and finite even with empty bins.
pub fn jeffrey_divergence(h: &Histogram, k: &Histogram) -> Result<f64> {
    same_len(h, k)?;
    let (h, k) = (h.normalised()?, k.normalised()?);
    let total: f64 = h
        .bins
        .iter()
        .zip(&k.bins)
        .map(|(&a, &b)| {
            let m = (a + b) / 2.0;
            plogq(a, m) + plogq(b, m)
        })
        .sum();
    Ok(total.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChiSquareForm {
    /// `Σ (h_i − m_i)² / m_i`; symmetric, non-negative.
    #[default]
    Squared,
    /// `Σ (h_i − m_i) / h_i` exactly as often printed; may be negative.
    Literal,
}

/// χ² statistic between two histograms, evaluated on the bin values as given,
/// with `m_i = (h_i + k_i) / 2`. Bins whose denominator is zero contribute 0.
pub fn chi_square(h: &Histogram, k: &Histogram, form: ChiSquareForm) -> Result<f64> {
    same_len(h, k)?;
    Ok(h.bins
        .iter()
        .zip(&k.bins)
        .map(|(&a, &b)| {
            let m = (a + b) / 2.0;
            match form {
                ChiSquareForm::Squared if m > 0.0 => (a - m) * (a - m) / m,
                ChiSquareForm::Literal if a > 0.0 => (a - m) / a,
                _ => 0.0,
            }
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(b: &[f64]) -> Histogram {
        Histogram::new(b.to_vec()).unwrap()
    }

    #[test]
    fn kl_examples() {
        let h = hist(&[0.5, 0.5]);
        let k = hist(&[0.25, 0.75]);
        assert_eq!(kl_divergence(&h, &h).unwrap(), 0.0);
        let want = 0.5 + 0.5 * (2.0f64 / 3.0).log2();
        let got = kl_divergence(&h, &k).unwrap();
        assert!((got - want).abs() < 1e-12);
        assert!((got - 0.2075).abs() < 1e-4);
        let back = kl_divergence(&k, &h).unwrap();
        assert!((got - back).abs() > 1e-3);
    }

    #[test]
    fn kl_renormalises_counts() {
        let a = kl_divergence(&hist(&[2.0, 2.0]), &hist(&[1.0, 3.0])).unwrap();
        let b = kl_divergence(&hist(&[0.5, 0.5]), &hist(&[0.25, 0.75])).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn kl_errors() {
        assert!(matches!(
            kl_divergence(&hist(&[0.5, 0.5]), &hist(&[1.0, 0.0])),
            Err(Error::InfiniteDivergence { bin: 1 })
        ));
        assert!(matches!(
            kl_divergence(&hist(&[1.0]), &hist(&[0.5, 0.5])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Histogram::new(vec![]).is_err());
        assert!(Histogram::new(vec![-1.0]).is_err());
    }

    #[test]
    fn jeffrey_examples() {
        let h = hist(&[1.0, 0.0]);
        let k = hist(&[0.0, 1.0]);
        assert!((jeffrey_divergence(&h, &k).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(jeffrey_divergence(&h, &h).unwrap(), 0.0);
        let (a, b) = (hist(&[0.1, 0.6, 0.3]), hist(&[0.3, 0.3, 0.4]));
        assert_eq!(jeffrey_divergence(&a, &b).unwrap(), jeffrey_divergence(&b, &a).unwrap());
    }

    #[test]
    fn chi_square_examples() {
        let (h, k) = (hist(&[4.0, 2.0]), hist(&[2.0, 6.0]));
        let got = chi_square(&h, &k, ChiSquareForm::Squared).unwrap();
        assert!((got - (1.0 / 3.0 + 1.0)).abs() < 1e-12);
        assert_eq!(got, chi_square(&k, &h, ChiSquareForm::Squared).unwrap());
        assert_eq!(chi_square(&h, &h, ChiSquareForm::Squared).unwrap(), 0.0);
        // (4-3)/4 + (2-4)/2
        let lit = chi_square(&h, &k, ChiSquareForm::Literal).unwrap();
        assert!((lit - (0.25 - 1.0)).abs() < 1e-12);
    }
}
