use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureKind};
use crate::error::{Error, Result};

/// Shannon entropy in bits of the class proportions in `labels`.
pub fn entropy(labels: &[usize]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; n_classes];
    for &l in labels {
        counts[l] += 1;
    }
    Ok(entropy_of_counts(&counts))
}

pub(crate) fn entropy_of_counts(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.log2()
        })
        .sum::<f64>()
}

/// Information gain of partitioning on feature `f`: by level for categorical
/// features, and at the best midpoint threshold for numeric ones.
pub fn information_gain(data: &Dataset, f: usize) -> Result<f64> {
    if f >= data.dim() {
        return Err(Error::UnknownFeature(format!("#{f}")));
    }
    let labels = data.labels();
    let k = data.n_classes();
    let mut total = vec![0usize; k];
    for &l in labels {
        total[l] += 1;
    }
    let n = labels.len() as f64;
    let base = entropy_of_counts(&total);
    let gain = match data.schema().features()[f].kind {
        FeatureKind::Categorical => {
            let levels = data.levels(f).len().max(1);
            let mut counts = vec![vec![0usize; k]; levels];
            for (i, &l) in labels.iter().enumerate() {
                counts[data.row(i)[f] as usize][l] += 1;
            }
            let cond: f64 = counts
                .iter()
                .map(|c| c.iter().sum::<usize>() as f64 / n * entropy_of_counts(c))
                .sum();
            base - cond
        }
        FeatureKind::Numeric => {
            let mut order: Vec<usize> = (0..labels.len()).collect();
            order.sort_by(|&a, &b| data.row(a)[f].total_cmp(&data.row(b)[f]));
            let mut left = vec![0usize; k];
            let mut best_cond = f64::INFINITY;
            for w in 0..order.len() {
                left[labels[order[w]]] += 1;
                let here = data.row(order[w])[f];
                // a threshold only falls between distinct values
                if w + 1 == order.len() || data.row(order[w + 1])[f] == here {
                    continue;
                }
                let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
                let nl = (w + 1) as f64;
                let cond = nl / n * entropy_of_counts(&left) + (n - nl) / n * entropy_of_counts(&right);
                best_cond = best_cond.min(cond);
            }
            if best_cond.is_finite() {
                base - best_cond
            } else {
                0.0
            }
        }
    };
    Ok(gain.max(0.0))
}

/// Threshold chosen for a numeric feature: the midpoint with maximal gain.
pub fn best_threshold(data: &Dataset, f: usize) -> Result<Option<f64>> {
    if f >= data.dim() {
        return Err(Error::UnknownFeature(format!("#{f}")));
    }
    let mut values: Vec<f64> = data.values().column(f);
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut best: Option<(f64, f64)> = None;
    for w in values.windows(2) {
        let t = (w[0] + w[1]) / 2.0;
        let left: Vec<usize> = (0..data.len()).filter(|&i| data.row(i)[f] <= t).collect();
        let mut lc = vec![0usize; data.n_classes()];
        let mut rc = vec![0usize; data.n_classes()];
        for i in 0..data.len() {
            if left.binary_search(&i).is_ok() {
                lc[data.labels()[i]] += 1;
            } else {
                rc[data.labels()[i]] += 1;
            }
        }
        let n = data.len() as f64;
        let nl = left.len() as f64;
        let cond = nl / n * entropy_of_counts(&lc) + (n - nl) / n * entropy_of_counts(&rc);
        if best.is_none_or(|(c, _)| cond < c) {
            best = Some((cond, t));
        }
    }
    Ok(best.map(|(_, t)| t))
}

/// 2×2 contingency counts of a presence feature against one class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contingency {
    /// Feature present, in class.
    pub present_in: usize,
    /// Feature absent, in class.
    pub absent_in: usize,
    /// Feature present, outside the class.
    pub present_out: usize,
    /// Feature absent, outside the class.
    pub absent_out: usize,
}

impl Contingency {
    /// `Odds(f | c) / Odds(f | c̄)`. When any cell is zero, 0.5 is added to
    /// every cell so the ratio stays finite and positive.
    pub fn odds_ratio(&self) -> f64 {
        let cells = [self.present_in, self.absent_in, self.present_out, self.absent_out];
        let s = if cells.contains(&0) { 0.5 } else { 0.0 };
        let [a, b, c, d] = cells.map(|v| v as f64 + s);
        (a / b) / (c / d)
    }
}

/// Contingency table of feature `f` (present = 1) against `class`.
/// Needs a two-class task and 0/1 feature values.
pub fn contingency(data: &Dataset, f: usize, class: usize) -> Result<Contingency> {
    if data.n_classes() != 2 {
        return Err(Error::NotBinary("odds ratio needs exactly two classes"));
    }
    if f >= data.dim() {
        return Err(Error::UnknownFeature(format!("#{f}")));
    }
    if class >= 2 {
        return Err(Error::param("class", format!("class id {class} out of range")));
    }
    let mut t = Contingency {
        present_in: 0,
        absent_in: 0,
        present_out: 0,
        absent_out: 0,
    };
    for (i, &l) in data.labels().iter().enumerate() {
        let v = data.row(i)[f];
        if v != 0.0 && v != 1.0 {
            return Err(Error::NotBinary("odds ratio needs 0/1 feature values"));
        }
        match (v == 1.0, l == class) {
            (true, true) => t.present_in += 1,
            (false, true) => t.absent_in += 1,
            (true, false) => t.present_out += 1,
            (false, false) => t.absent_out += 1,
        }
    }
    Ok(t)
}

pub fn odds_ratio(data: &Dataset, f: usize, class: usize) -> Result<f64> {
    Ok(contingency(data, f, class)?.odds_ratio())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Ig,
    /// Odds ratio for the given class.
    OrClass(usize),
    /// Odds ratio for the complement of the given class.
    OrNonclass(usize),
}

impl Criterion {
    pub fn name(&self) -> String {
        match self {
            Criterion::Ig => "ig".into(),
            Criterion::OrClass(c) => format!("or_class({c})"),
            Criterion::OrNonclass(c) => format!("or_nonclass({c})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub feature: String,
    pub position: usize,
    pub criterion: Criterion,
    pub value: f64,
}

pub fn score_feature(data: &Dataset, f: usize, criterion: Criterion) -> Result<f64> {
    match criterion {
        Criterion::Ig => information_gain(data, f),
        Criterion::OrClass(c) => odds_ratio(data, f, c),
        Criterion::OrNonclass(c) => {
            if c >= 2 {
                return Err(Error::param("class", format!("class id {c} out of range")));
            }
            odds_ratio(data, f, 1 - c)
        }
    }
}

/// The `top_n` best features by descending score; equal scores keep schema
/// order.
pub fn rank_features(data: &Dataset, criterion: Criterion, top_n: usize) -> Result<Vec<FeatureScore>> {
    if top_n > data.dim() {
        return Err(Error::param(
            "top_n",
            format!("top_n = {top_n} exceeds the {} features", data.dim()),
        ));
    }
    let scores: Vec<f64> = (0..data.dim())
        .into_par_iter()
        .map(|f| score_feature(data, f, criterion))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..data.dim()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    Ok(order
        .into_iter()
        .take(top_n)
        .map(|f| FeatureScore {
            feature: data.schema().features()[f].name.clone(),
            position: f,
            criterion,
            value: scores[f],
        })
        .collect())
}

/// Fraction of samples whose selected features are all zero, i.e. samples
/// the selection leaves with no evidence at all.
pub fn zero_coverage(data: &Dataset, selected: &[usize]) -> f64 {
    let empty = (0..data.len())
        .filter(|&i| selected.iter().all(|&f| data.row(i)[f] == 0.0))
        .count();
    empty as f64 / data.len() as f64
}
