use serde::{Deserialize, Serialize};

use crate::data::FeatureKind;
use crate::error::{Error, Result};

pub(crate) fn check_lengths<A, B>(q: &[A], x: &[B]) -> Result<()> {
    if q.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: q.len(),
            found: x.len(),
        });
    }
    Ok(())
}

fn check_weights(weights: Option<&[f64]>, len: usize) -> Result<()> {
    match weights {
        Some(w) if w.len() != len => Err(Error::DimensionMismatch {
            expected: len,
            found: w.len(),
        }),
        Some(w) if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) => {
            Err(Error::param("weights", "weights must be finite and >= 0"))
        }
        _ => Ok(()),
    }
}

/// Exponent of an L_p norm, with fast paths for the common cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Exponent {
    One,
    Two,
    General(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::param("p", format!("Minkowski p = {p} must be >= 1")));
        }
        Ok(if p == 1.0 {
            Exponent::One
        } else if p == 2.0 {
            Exponent::Two
        } else if p.is_infinite() {
            Exponent::Infinity
        } else {
            Exponent::General(p)
        })
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::One => 1.0,
            Exponent::Two => 2.0,
            Exponent::General(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

/// Weighted L_p distance split into a monotone "reduced" form (no final root)
/// and a finishing step. Indexes compare reduced values and only finish the
/// ones they return, so tree and brute-force distances agree bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpNorm {
    exponent: Exponent,
    weights: Option<Vec<f64>>,
}

impl LpNorm {
    pub fn new(exponent: Exponent, weights: Option<Vec<f64>>) -> Self {
        LpNorm { exponent, weights }
    }

    pub fn exponent(&self) -> Exponent {
        self.exponent
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    #[inline]
    pub fn term(&self, feature: usize, diff: f64) -> f64 {
        lp_term(self.exponent, self.weights.as_deref(), feature, diff)
    }

    #[inline]
    pub fn combine(&self, acc: f64, term: f64) -> f64 {
        lp_combine(self.exponent, acc, term)
    }

    #[inline]
    pub fn reduced(&self, a: &[f64], b: &[f64]) -> f64 {
        lp_reduced(self.exponent, self.weights.as_deref(), a, b)
    }

    #[inline]
    pub fn finish(&self, reduced: f64) -> f64 {
        lp_finish(self.exponent, reduced)
    }

    #[inline]
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.finish(self.reduced(a, b))
    }
}

/// Contribution of one absolute coordinate difference.
#[inline]
pub(crate) fn lp_term(exponent: Exponent, weights: Option<&[f64]>, feature: usize, diff: f64) -> f64 {
    let t = match exponent {
        Exponent::One | Exponent::Infinity => diff,
        Exponent::Two => diff * diff,
        Exponent::General(p) => diff.powf(p),
    };
    match weights {
        Some(w) => w[feature] * t,
        None => t,
    }
}

#[inline]
pub(crate) fn lp_combine(exponent: Exponent, acc: f64, term: f64) -> f64 {
    match exponent {
        Exponent::Infinity => acc.max(term),
        _ => acc + term,
    }
}

#[inline]
pub(crate) fn lp_reduced(exponent: Exponent, weights: Option<&[f64]>, a: &[f64], b: &[f64]) -> f64 {
    match (weights, exponent) {
        (None, Exponent::Two) => a
            .iter()
            .zip(b)
            .map(|(x, y)| {
                let d = x - y;
                d * d
            })
            .sum(),
        (None, Exponent::One) => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        (None, Exponent::Infinity) => a
            .iter()
            .zip(b)
            .fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs())),
        _ => a.iter().zip(b).enumerate().fold(0.0, |acc, (f, (x, y))| {
            lp_combine(exponent, acc, lp_term(exponent, weights, f, (x - y).abs()))
        }),
    }
}

#[inline]
pub(crate) fn lp_finish(exponent: Exponent, reduced: f64) -> f64 {
    match exponent {
        Exponent::One | Exponent::Infinity => reduced,
        Exponent::Two => reduced.sqrt(),
        Exponent::General(p) => reduced.powf(1.0 / p),
    }
}

/// Weighted Minkowski distance `(Σ w_f |q_f − x_f|^p)^(1/p)`, `p >= 1`.
pub fn minkowski(q: &[f64], x: &[f64], p: f64, weights: Option<&[f64]>) -> Result<f64> {
    check_lengths(q, x)?;
    check_weights(weights, q.len())?;
    let norm = LpNorm::new(Exponent::new(p)?, weights.map(<[f64]>::to_vec));
    Ok(norm.distance(q, x))
}

/// L∞ distance: the largest coordinate difference.
pub fn chebyshev(q: &[f64], x: &[f64]) -> Result<f64> {
    check_lengths(q, x)?;
    Ok(LpNorm::new(Exponent::Infinity, None).distance(q, x))
}

/// Mixed-feature distance `Σ w_f δ(q_f, x_f)`: absolute difference on numeric
/// features and 0/1 overlap on categorical ones (compared by level id).
pub fn heterogeneous(
    q: &[f64],
    x: &[f64],
    kinds: &[FeatureKind],
    weights: Option<&[f64]>,
) -> Result<f64> {
    check_lengths(q, x)?;
    check_lengths(q, kinds)?;
    check_weights(weights, q.len())?;
    Ok(heterogeneous_unchecked(q, x, kinds, weights))
}

#[inline]
pub(crate) fn heterogeneous_unchecked(
    q: &[f64],
    x: &[f64],
    kinds: &[FeatureKind],
    weights: Option<&[f64]>,
) -> f64 {
    let mut total = 0.0;
    for f in 0..q.len() {
        let delta = match kinds[f] {
            FeatureKind::Numeric => (q[f] - x[f]).abs(),
            FeatureKind::Categorical => {
                if q[f] == x[f] {
                    0.0
                } else {
                    1.0
                }
            }
        };
        total += weights.map_or(1.0, |w| w[f]) * delta;
    }
    total
}

/// What a similarity score measures, which fixes its legal range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoreKind {
    /// Cosine over non-negative vectors, in [0, 1].
    Cosine,
    /// Cosine with negative components allowed, in [−1, 1].
    SignedCosine,
    /// Pearson or Spearman correlation, in [−1, 1].
    Correlation,
}

impl ScoreKind {
    pub fn range(self) -> (f64, f64) {
        match self {
            ScoreKind::Cosine => (0.0, 1.0),
            ScoreKind::SignedCosine | ScoreKind::Correlation => (-1.0, 1.0),
        }
    }
}

pub(crate) const SCORE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore {
    pub value: f64,
    pub kind: ScoreKind,
}

impl SimilarityScore {
    pub fn new(value: f64, kind: ScoreKind) -> Result<Self> {
        let (lo, hi) = kind.range();
        if !(value >= lo - SCORE_SLACK && value <= hi + SCORE_SLACK) {
            return Err(Error::ScoreOutOfRange { value, lo, hi });
        }
        Ok(SimilarityScore { value, kind })
    }

    /// Value clamped into the declared range (removes round-off slack).
    fn clamped(self) -> f64 {
        let (lo, hi) = self.kind.range();
        self.value.clamp(lo, hi)
    }
}

/// How a correlation maps to a distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationScale {
    /// `1 − r`, range [0, 2].
    #[default]
    Raw,
    /// `(1 − r) / 2`, range [0, 1].
    Halved,
}

pub fn to_distance(score: SimilarityScore, scale: CorrelationScale) -> Result<f64> {
    let score = SimilarityScore::new(score.value, score.kind)?;
    let s = score.clamped();
    Ok(match (score.kind, scale) {
        (ScoreKind::Correlation, CorrelationScale::Halved) => (1.0 - s) / 2.0,
        _ => 1.0 - s,
    })
}

#[inline]
pub(crate) fn cosine_unchecked(q: &[f64], x: &[f64]) -> f64 {
    let (mut dot, mut nq, mut nx) = (0.0, 0.0, 0.0);
    for (a, b) in q.iter().zip(x) {
        dot += a * b;
        nq += a * a;
        nx += b * b;
    }
    dot / (nq.sqrt() * nx.sqrt())
}

pub(crate) fn check_cosine_input(v: &[f64], allow_negative: bool) -> Result<()> {
    if !allow_negative && v.iter().any(|&c| c < 0.0) {
        return Err(Error::NegativeComponent);
    }
    if v.iter().all(|&c| c == 0.0) {
        return Err(Error::ZeroNorm);
    }
    Ok(())
}

/// Cosine of the angle between `q` and `x`. Negative components are rejected
/// unless `allow_negative`, in which case the score lies in [−1, 1].
pub fn cosine_similarity(q: &[f64], x: &[f64], allow_negative: bool) -> Result<SimilarityScore> {
    check_lengths(q, x)?;
    check_cosine_input(q, allow_negative)?;
    check_cosine_input(x, allow_negative)?;
    let kind = if allow_negative {
        ScoreKind::SignedCosine
    } else {
        ScoreKind::Cosine
    };
    let (lo, hi) = kind.range();
    SimilarityScore::new(cosine_unchecked(q, x).clamp(lo, hi), kind)
}
