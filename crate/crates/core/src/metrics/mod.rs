//! Vector-space, correlation, histogram and compression (dis)similarity
//! measures, plus the [`Distance`] trait the indexes are generic over.

mod compression;
mod correlation;
mod histogram;
mod vector;

pub use compression::{ncd, Compressor, Deflate, NcdDenominator};
pub use correlation::{average_ranks, pearson, spearman};
pub use histogram::{chi_square, jeffrey_divergence, kl_divergence, ChiSquareForm, Histogram};
pub use vector::{
    chebyshev, cosine_similarity, heterogeneous, minkowski, to_distance, CorrelationScale,
    Exponent, LpNorm, ScoreKind, SimilarityScore,
};

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureKind};
use crate::error::{Error, Result};

/// A dissimilarity over fixed-length rows.
pub trait Distance: Send + Sync {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64;

    /// True when the measure satisfies the metric axioms, including the
    /// triangle inequality. Metric trees refuse measures that return false.
    fn is_metric(&self) -> bool;

    fn name(&self) -> String;
}

impl<D: Distance + ?Sized> Distance for &D {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        (**self).distance(a, b)
    }
    fn is_metric(&self) -> bool {
        (**self).is_metric()
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MetricKind {
    Minkowski { p: f64 },
    Chebyshev,
    Heterogeneous,
    Cosine,
    Pearson,
    Spearman,
}

impl MetricKind {
    pub fn name(&self) -> String {
        match self {
            MetricKind::Minkowski { p } => format!("minkowski(p={p})"),
            MetricKind::Chebyshev => "chebyshev".into(),
            MetricKind::Heterogeneous => "heterogeneous".into(),
            MetricKind::Cosine => "cosine".into(),
            MetricKind::Pearson => "pearson".into(),
            MetricKind::Spearman => "spearman".into(),
        }
    }
}

/// A configured row distance: kind, optional feature weights, feature kinds
/// (for the heterogeneous overlap metric) and similarity-to-distance options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    kind: MetricKind,
    weights: Option<Vec<f64>>,
    #[serde(default)]
    feature_kinds: Vec<FeatureKind>,
    #[serde(default)]
    scale: CorrelationScale,
    #[serde(default)]
    allow_negative: bool,
}

impl MetricConfig {
    pub fn new(kind: MetricKind) -> Result<Self> {
        if let MetricKind::Minkowski { p } = kind {
            Exponent::new(p)?;
        }
        Ok(MetricConfig {
            kind,
            weights: None,
            feature_kinds: Vec::new(),
            scale: CorrelationScale::Raw,
            allow_negative: false,
        })
    }

    pub fn euclidean() -> Self {
        MetricConfig::new(MetricKind::Minkowski { p: 2.0 }).expect("p = 2 is valid")
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::param("weights", "weights must be finite and >= 0"));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn with_feature_kinds(mut self, kinds: Vec<FeatureKind>) -> Self {
        self.feature_kinds = kinds;
        self
    }

    pub fn with_correlation_scale(mut self, scale: CorrelationScale) -> Self {
        self.scale = scale;
        self
    }

    pub fn allow_negative_cosine(mut self, allow: bool) -> Self {
        self.allow_negative = allow;
        self
    }

    /// Adopts the dataset's feature kinds, and its schema weights when no
    /// explicit weights were set and the schema's are not all 1.
    pub fn for_dataset(mut self, data: &Dataset) -> Result<Self> {
        self.feature_kinds = data.schema().kinds();
        if self.weights.is_none() && data.schema().weights().iter().any(|&w| w != 1.0) {
            self.weights = Some(data.schema().weights().to_vec());
        }
        self.validate(data.dim())?;
        if !matches!(self.kind, MetricKind::Heterogeneous) && !data.schema().is_all_numeric() {
            let f = data
                .schema()
                .features()
                .iter()
                .find(|f| f.kind == FeatureKind::Categorical)
                .expect("not all numeric");
            return Err(Error::NotNumeric(f.name.clone()));
        }
        for i in 0..data.len() {
            self.check_row(data.row(i))?;
        }
        Ok(self)
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if let Some(w) = &self.weights {
            if w.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: w.len(),
                });
            }
        }
        if !self.feature_kinds.is_empty() && self.feature_kinds.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.feature_kinds.len(),
            });
        }
        Ok(())
    }

    /// Rejects rows on which the measure is undefined (zero-norm or negative
    /// rows for cosine, constant rows for correlations).
    pub fn check_row(&self, row: &[f64]) -> Result<()> {
        match self.kind {
            MetricKind::Cosine => vector::check_cosine_input(row, self.allow_negative),
            MetricKind::Pearson | MetricKind::Spearman => {
                if row.len() < 2 {
                    return Err(Error::param("length", "correlation needs at least two values"));
                }
                if row.iter().all(|&v| v == row[0]) {
                    return Err(Error::ZeroVariance);
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn has_categorical(&self) -> bool {
        self.feature_kinds.contains(&FeatureKind::Categorical)
    }

    /// The equivalent coordinate-wise L_p norm, when one exists. Kd-trees and
    /// random-projection forests need this.
    pub fn lp_norm(&self) -> Option<LpNorm> {
        let exponent = match self.kind {
            MetricKind::Minkowski { p } => Exponent::new(p).ok()?,
            MetricKind::Chebyshev => Exponent::Infinity,
            MetricKind::Heterogeneous if !self.has_categorical() => Exponent::One,
            _ => return None,
        };
        Some(LpNorm::new(exponent, self.weights.clone()))
    }
}

impl Distance for MetricConfig {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            MetricKind::Minkowski { p } => {
                let e = Exponent::new(p).expect("validated at construction");
                vector::lp_finish(e, vector::lp_reduced(e, self.weights.as_deref(), a, b))
            }
            MetricKind::Chebyshev => {
                let e = Exponent::Infinity;
                vector::lp_finish(e, vector::lp_reduced(e, self.weights.as_deref(), a, b))
            }
            MetricKind::Heterogeneous => {
                if self.has_categorical() {
                    vector::heterogeneous_unchecked(a, b, &self.feature_kinds, self.weights.as_deref())
                } else {
                    let e = Exponent::One;
                    vector::lp_finish(e, vector::lp_reduced(e, self.weights.as_deref(), a, b))
                }
            }
            MetricKind::Cosine => {
                let lo = if self.allow_negative { -1.0 } else { 0.0 };
                let s = vector::cosine_unchecked(a, b);
                if s.is_nan() {
                    1.0
                } else {
                    1.0 - s.clamp(lo, 1.0)
                }
            }
            MetricKind::Pearson | MetricKind::Spearman => {
                let r = if matches!(self.kind, MetricKind::Pearson) {
                    correlation::pearson_unchecked(a, b)
                } else {
                    correlation::pearson_unchecked(&average_ranks(a), &average_ranks(b))
                }
                .unwrap_or(0.0);
                match self.scale {
                    CorrelationScale::Raw => 1.0 - r,
                    CorrelationScale::Halved => (1.0 - r) / 2.0,
                }
            }
        }
    }

    fn is_metric(&self) -> bool {
        matches!(
            self.kind,
            MetricKind::Minkowski { .. } | MetricKind::Chebyshev | MetricKind::Heterogeneous
        )
    }

    fn name(&self) -> String {
        self.kind.name()
    }
}
