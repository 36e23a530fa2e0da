use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::Distance;

/// A finite, non-empty real-valued sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries(Vec<f64>);

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, feature: 0 });
        }
        Ok(TimeSeries(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Alignment between two series as 0-based `(i, j)` index pairs. Starts at
/// `(0, 0)`, ends at `(m − 1, n − 1)`, and every step is `(1,0)`, `(0,1)` or
/// `(1,1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WarpPath {
    steps: Vec<(usize, usize)>,
}

impl WarpPath {
    pub fn steps(&self) -> &[(usize, usize)] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Checks the boundary, step and length conditions for series of
    /// lengths `m` and `n`.
    pub fn is_valid_for(&self, m: usize, n: usize) -> bool {
        let s = &self.steps;
        if s.first() != Some(&(0, 0)) || s.last() != Some(&(m - 1, n - 1)) || s.len() > m + n - 1 {
            return false;
        }
        s.windows(2).all(|w| {
            let (di, dj) = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
            matches!((di, dj), (1, 0) | (0, 1) | (1, 1))
        })
    }

    /// `sqrt(Σ (q_i − x_j)²)` along this path.
    pub fn cost(&self, q: &[f64], x: &[f64]) -> f64 {
        self.steps
            .iter()
            .map(|&(i, j)| (q[i] - x[j]).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

fn check_band(m: usize, n: usize, band: Option<usize>) -> Result<()> {
    if let Some(band) = band {
        let diff = m.abs_diff(n);
        if band < diff {
            return Err(Error::BandTooNarrow { band, diff });
        }
    }
    Ok(())
}

/// Cumulative squared-cost table, `(m+1) × (n+1)` with an infinite border.
fn cost_table(q: &[f64], x: &[f64], band: Option<usize>) -> Vec<f64> {
    let (m, n) = (q.len(), x.len());
    let w = n + 1;
    let mut d = vec![f64::INFINITY; (m + 1) * w];
    d[0] = 0.0;
    for i in 1..=m {
        let (lo, hi) = match band {
            Some(b) => (i.saturating_sub(b).max(1), (i + b).min(n)),
            None => (1, n),
        };
        for j in lo..=hi {
            let c = (q[i - 1] - x[j - 1]).powi(2);
            let best = d[(i - 1) * w + j - 1]
                .min(d[i * w + j - 1])
                .min(d[(i - 1) * w + j]);
            d[i * w + j] = c + best;
        }
    }
    d
}

/// Dynamic time warping distance `min_π sqrt(Σ_{(i,j)∈π} (q_i − x_j)²)` and
/// an optimal path.
///
/// `band` is a Sakoe-Chiba width: cells with `|i − j| > band` are excluded.
/// The backtrace prefers the diagonal predecessor, then the one reached by a
/// `(0,1)` step, then `(1,0)`, so paths are deterministic.
pub fn dtw(q: &TimeSeries, x: &TimeSeries, band: Option<usize>) -> Result<(f64, WarpPath)> {
    let (qv, xv) = (q.values(), x.values());
    let (m, n) = (qv.len(), xv.len());
    check_band(m, n, band)?;
    let d = cost_table(qv, xv, band);
    let w = n + 1;

    let mut steps = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (m, n);
    steps.push((i - 1, j - 1));
    while (i, j) != (1, 1) {
        let candidates = [(i - 1, j - 1), (i, j - 1), (i - 1, j)];
        let mut best = None;
        for (ci, cj) in candidates {
            if ci == 0 || cj == 0 {
                continue;
            }
            let v = d[ci * w + cj];
            if best.is_none_or(|(bv, _)| v < bv) {
                best = Some((v, (ci, cj)));
            }
        }
        let (_, next) = best.expect("a finite predecessor exists inside the band");
        (i, j) = next;
        steps.push((i - 1, j - 1));
    }
    steps.reverse();
    Ok((d[m * w + n].sqrt(), WarpPath { steps }))
}

/// DTW distance only, on raw slices.
pub fn dtw_distance(q: &[f64], x: &[f64], band: Option<usize>) -> Result<f64> {
    if q.is_empty() || x.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_band(q.len(), x.len(), band)?;
    let d = cost_table(q, x, band);
    Ok(d[d.len() - 1].sqrt())
}

/// DTW as a row distance for brute-force neighbour search. Not a metric, so
/// metric trees refuse it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Dtw {
    pub band: Option<usize>,
}

impl Distance for Dtw {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        dtw_distance(a, b, self.band).unwrap_or(f64::INFINITY)
    }

    fn is_metric(&self) -> bool {
        false
    }

    fn name(&self) -> String {
        match self.band {
            Some(b) => format!("dtw(band={b})"),
            None => "dtw".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn identity_is_zero_with_diagonal_path() {
        let q = ts(&[1.0, 3.0, 2.0, 5.0]);
        let (d, path) = dtw(&q, &q, None).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(path.steps(), &[(0, 0), (1, 1), (2, 2), (3, 3)]);
    }

    #[test]
    fn constant_series_of_different_lengths() {
        let (d, path) = dtw(&ts(&[0.0, 0.0, 0.0]), &ts(&[0.0, 0.0]), None).unwrap();
        assert_eq!(d, 0.0);
        assert!(path.is_valid_for(3, 2));
    }

    #[test]
    fn small_worked_case() {
        let (q, x) = (ts(&[1.0, 2.0, 3.0]), ts(&[1.0, 3.0]));
        let (d, path) = dtw(&q, &x, None).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        assert!(path.is_valid_for(3, 2));
        assert!((path.cost(q.values(), x.values()) - d).abs() < 1e-12);
        // from (2,1) both (1,0) and (1,1) cost 1; the diagonal wins
        assert_eq!(path.steps(), &[(0, 0), (1, 0), (2, 1)]);
    }

    #[test]
    fn band_errors_and_equivalence() {
        let (q, x) = (ts(&[1.0, 2.0, 3.0, 4.0, 5.0]), ts(&[1.0, 3.0]));
        assert!(matches!(dtw(&q, &x, Some(2)), Err(Error::BandTooNarrow { band: 2, diff: 3 })));
        let free = dtw(&q, &x, None).unwrap().0;
        assert_eq!(dtw(&q, &x, Some(5)).unwrap().0, free);
        assert!(dtw(&q, &x, Some(3)).unwrap().0 >= free);
    }

    #[test]
    fn empty_series_rejected() {
        assert!(matches!(TimeSeries::new(vec![]), Err(Error::EmptyInput)));
        assert!(matches!(dtw_distance(&[], &[1.0], None), Err(Error::EmptyInput)));
    }

    #[test]
    fn identity_of_indiscernibles_fails() {
        // zero distance between different series
        assert_eq!(dtw_distance(&[1.0, 1.0, 2.0], &[1.0, 2.0], None).unwrap(), 0.0);
    }

    #[test]
    fn not_a_metric() {
        assert!(!Dtw::default().is_metric());
    }
}
