use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::learner::{evaluate_cv, KnnConfig};

/// A candidate only wins a round if it beats the incumbent by more than this.
pub const MIN_IMPROVEMENT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Start empty and add features.
    #[default]
    Forward,
    /// Start full and delete features.
    Backward,
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(Direction::Forward),
            "backward" => Ok(Direction::Backward),
            other => Err(Error::param("direction", format!("unknown direction '{other}'"))),
        }
    }
}

/// One evaluated node of the subset lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub round: usize,
    pub mask: Vec<bool>,
    pub score: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSearch {
    pub direction: Direction,
    pub mask: Vec<bool>,
    pub score: f64,
    /// Every mask evaluated, in order.
    pub history: Vec<Evaluation>,
}

impl SubsetSearch {
    pub fn selected(&self) -> Vec<usize> {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect()
    }
}

/// Greedy hill climb over feature subsets. Each round scores every single
/// addition (forward) or deletion (backward) with `evaluate` and moves to the
/// best one, lowest feature index on ties; the search stops when no
/// candidate improves on the current score by more than [`MIN_IMPROVEMENT`].
pub fn wrapper_search<F>(p: usize, direction: Direction, evaluate: F) -> Result<SubsetSearch>
where
    F: Fn(&[bool]) -> Result<f64> + Sync,
{
    if p == 0 {
        return Err(Error::param("features", "wrapper search needs at least one feature"));
    }
    let start = direction == Direction::Backward;
    let mut mask = vec![start; p];
    let mut score = evaluate(&mask)?;
    let mut history = vec![Evaluation {
        round: 0,
        mask: mask.clone(),
        score,
        accepted: true,
    }];
    for round in 1..=p {
        // features that can still be flipped in this direction
        let moves: Vec<usize> = (0..p).filter(|&f| mask[f] == start).collect();
        if moves.is_empty() {
            break;
        }
        let scored: Vec<(usize, Vec<bool>, f64)> = moves
            .par_iter()
            .map(|&f| {
                let mut m = mask.clone();
                m[f] = !start;
                evaluate(&m).map(|s| (f, m, s))
            })
            .collect::<Result<_>>()?;
        let mut best = 0;
        for (i, c) in scored.iter().enumerate() {
            if c.2 > scored[best].2 {
                best = i;
            }
        }
        let improves = scored[best].2 > score + MIN_IMPROVEMENT;
        for (i, (_, m, s)) in scored.iter().enumerate() {
            history.push(Evaluation {
                round,
                mask: m.clone(),
                score: *s,
                accepted: improves && i == best,
            });
        }
        if !improves {
            break;
        }
        mask = scored[best].1.clone();
        score = scored[best].2;
    }
    Ok(SubsetSearch {
        direction,
        mask,
        score,
        history,
    })
}

/// Mean cross-validated k-NN accuracy on the masked features. The empty
/// subset scores the majority-class rate, the accuracy of a classifier that
/// sees no features.
pub fn cv_accuracy(data: &Dataset, folds: &FoldPlan, config: &KnnConfig, mask: &[bool]) -> Result<f64> {
    if !mask.iter().any(|&m| m) {
        let counts = data.class_counts();
        let top = counts.iter().copied().max().unwrap_or(0);
        return Ok(top as f64 / data.len() as f64);
    }
    let sub = data.select_features(mask)?;
    let mut cfg = config.clone();
    if let Some(w) = config.metric.weights() {
        let kept: Vec<f64> = w.iter().zip(mask).filter(|(_, &m)| m).map(|(w, _)| *w).collect();
        cfg.metric = cfg.metric.clone().with_weights(kept)?;
    }
    Ok(evaluate_cv(&sub, folds, &cfg)?
        .mean_accuracy
        .expect("classification report"))
}

/// [`wrapper_search`] scored by [`cv_accuracy`].
pub fn wrapper_cv(data: &Dataset, folds: &FoldPlan, config: &KnnConfig, direction: Direction) -> Result<SubsetSearch> {
    wrapper_search(data.dim(), direction, |m| cv_accuracy(data, folds, config, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Matrix;
    use crate::metrics::MetricConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Feature 1 decides the class; 0, 2 and 3 are uniform noise.
    fn one_signal(n: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let c = i % 2;
            rows.push(vec![rng.random(), c as f64 + 0.9 * rng.random::<f64>(), rng.random(), rng.random()]);
            labels.push(c);
        }
        Dataset::from_numeric(Matrix::from_rows(&rows).unwrap(), labels).unwrap()
    }

    fn exhaustive(data: &Dataset, folds: &FoldPlan, cfg: &KnnConfig) -> (Vec<bool>, f64) {
        let p = data.dim();
        let mut best = (vec![false; p], f64::NEG_INFINITY);
        for bits in 0..1u32 << p {
            let mask: Vec<bool> = (0..p).map(|f| bits >> f & 1 == 1).collect();
            let s = cv_accuracy(data, folds, cfg, &mask).unwrap();
            if s > best.1 + MIN_IMPROVEMENT {
                best = (mask, s);
            }
        }
        best
    }

    #[test]
    fn forward_finds_the_signal_and_stops() {
        let data = one_signal(120);
        let folds = FoldPlan::stratified(&data, 4, 3).unwrap();
        let cfg = KnnConfig::new(MetricConfig::euclidean(), 3);
        let r = wrapper_cv(&data, &folds, &cfg, Direction::Forward).unwrap();
        assert_eq!(r.selected(), vec![1]);
        assert_eq!(r.score, 1.0);
        let (_, best) = exhaustive(&data, &folds, &cfg);
        assert_eq!(r.score, best);
        // empty, four additions, three more that fail to improve
        assert_eq!(r.history.len(), 1 + 4 + 3);
    }

    #[test]
    fn backward_drops_noise() {
        let data = one_signal(120);
        let folds = FoldPlan::stratified(&data, 4, 3).unwrap();
        let cfg = KnnConfig::new(MetricConfig::euclidean(), 3);
        let r = wrapper_cv(&data, &folds, &cfg, Direction::Backward).unwrap();
        assert!(r.mask[1]);
        assert!(r.selected().len() < 4);
        assert!(r.history.len() <= 1 + 4 + 3 + 2 + 1);
    }

    #[test]
    fn evaluation_count_is_bounded() {
        // a score that always improves forces the longest path
        let r = wrapper_search(4, Direction::Forward, |m| Ok(m.iter().filter(|&&b| b).count() as f64)).unwrap();
        assert_eq!(r.history.len(), 1 + 4 + 3 + 2 + 1);
        assert_eq!(r.mask, vec![true; 4]);
        let accepted: Vec<usize> = r.history.iter().filter(|e| e.accepted).map(|e| e.round).collect();
        assert_eq!(accepted, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn errors_propagate() {
        let r = wrapper_search(3, Direction::Forward, |m| {
            if m[2] { Err(Error::EmptyInput) } else { Ok(0.0) }
        });
        assert!(r.is_err());
        assert!(wrapper_search(0, Direction::Forward, |_| Ok(0.0)).is_err());
    }
}
