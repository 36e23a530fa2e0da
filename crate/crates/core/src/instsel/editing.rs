use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::competence::CompetenceModel;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::index::KBest;
use crate::metrics::Distance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub index: usize,
    pub reason: String,
    pub round: usize,
}

/// The outcome of editing a training set: retained row indices (ascending),
/// the algorithm and parameters that produced them, and why every other row
/// was left out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditedSet {
    pub algorithm: String,
    pub parameters: serde_json::Value,
    pub n_input: usize,
    pub retained: Vec<usize>,
    pub removals: Vec<Removal>,
}

impl EditedSet {
    pub fn removed(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.removals.iter().map(|r| r.index).collect();
        r.sort_unstable();
        r
    }

    pub fn retention(&self) -> f64 {
        self.retained.len() as f64 / self.n_input.max(1) as f64
    }

    /// Training rows kept by the edit.
    pub fn apply(&self, data: &Dataset) -> Dataset {
        data.subset(&self.retained)
    }
}

/// 1-NN label of row `q` among `members`, lowest index on distance ties.
fn nearest_label<D: Distance>(data: &Dataset, metric: &D, members: &[usize], q: usize) -> Option<usize> {
    let row = data.row(q);
    let mut best: Option<(f64, usize)> = None;
    for &m in members {
        let d = metric.distance(row, data.row(m));
        if best.is_none_or(|(bd, bi)| d < bd || (d == bd && m < bi)) {
            best = Some((d, m));
        }
    }
    best.map(|(_, m)| data.labels()[m])
}

/// True when 1-NN over `retained` labels every row of `data` correctly.
pub fn is_consistent<D: Distance>(data: &Dataset, metric: &D, retained: &[usize]) -> bool {
    (0..data.len())
        .into_par_iter()
        .all(|i| nearest_label(data, metric, retained, i) == Some(data.labels()[i]))
}

/// Incremental condensation: walk `order` repeatedly, adding every case the
/// current set misclassifies, until a full pass adds nothing.
fn condense<D: Distance>(data: &Dataset, metric: &D, order: &[usize]) -> (Vec<usize>, usize) {
    let mut kept: Vec<usize> = Vec::new();
    let mut inside = vec![false; data.len()];
    let mut passes = 0;
    loop {
        passes += 1;
        let mut added = false;
        for &c in order {
            if inside[c] {
                continue;
            }
            if nearest_label(data, metric, &kept, c) != Some(data.labels()[c]) {
                kept.push(c);
                inside[c] = true;
                added = true;
            }
        }
        if !added {
            break;
        }
    }
    (kept, passes)
}

fn finish_incremental(algorithm: &str, parameters: serde_json::Value, n: usize, kept: Vec<usize>, passes: usize) -> EditedSet {
    let mut inside = vec![false; n];
    kept.iter().for_each(|&i| inside[i] = true);
    let removals = (0..n)
        .filter(|&i| !inside[i])
        .map(|index| Removal {
            index,
            reason: "classified correctly by the edited set".into(),
            round: passes,
        })
        .collect();
    let mut retained = kept;
    retained.sort_unstable();
    EditedSet {
        algorithm: algorithm.into(),
        parameters,
        n_input: n,
        retained,
        removals,
    }
}

/// Hart's condensed nearest neighbour over a seeded shuffle of the cases.
pub fn cnn<D: Distance>(data: &Dataset, metric: &D, seed: u64) -> Result<EditedSet> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (kept, passes) = condense(data, metric, &order);
    Ok(finish_incremental("cnn", json!({ "seed": seed }), data.len(), kept, passes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverageOrder {
    /// Smallest coverage first: border cases are presented early.
    #[default]
    Ascending,
    Descending,
}

/// Conservative redundancy removal: CNN-style condensation with cases
/// presented by coverage-set size from a competence model built once.
/// Nothing is ever deleted from the edited set.
pub fn crr<D: Distance>(data: &Dataset, metric: &D) -> Result<EditedSet> {
    crr_ordered(data, metric, CoverageOrder::Ascending)
}

pub fn crr_ordered<D: Distance>(data: &Dataset, metric: &D, order: CoverageOrder) -> Result<EditedSet> {
    let model = CompetenceModel::build(data, metric)?;
    let mut cases: Vec<usize> = (0..data.len()).collect();
    // ties keep index order
    match order {
        CoverageOrder::Ascending => cases.sort_by_key(|&c| model.coverage(c).len()),
        CoverageOrder::Descending => cases.sort_by_key(|&c| std::cmp::Reverse(model.coverage(c).len())),
    }
    let (kept, passes) = condense(data, metric, &cases);
    Ok(finish_incremental("crr", json!({ "order": order }), data.len(), kept, passes))
}

/// `k` nearest members of `active` to case `i`, excluding `i`.
fn loo_neighbours<D: Distance>(data: &Dataset, metric: &D, active: &[usize], i: usize, k: usize) -> Vec<usize> {
    let mut best = KBest::new(k);
    let q = data.row(i);
    for &j in active {
        if j != i {
            best.push(metric.distance(q, data.row(j)), j);
        }
    }
    best.into_list(|d| d).indices()
}

/// Cases of `active` outvoted by their `k` leave-one-out neighbours within
/// `active`: some other class has strictly more votes than their own.
fn disagreeing<D: Distance>(data: &Dataset, metric: &D, active: &[usize], k: usize) -> Vec<usize> {
    let labels = data.labels();
    let n_classes = data.n_classes();
    active
        .par_iter()
        .copied()
        .filter(|&i| {
            let mut votes = vec![0usize; n_classes];
            for j in loo_neighbours(data, metric, active, i, k) {
                votes[labels[j]] += 1;
            }
            votes.iter().any(|&v| v > votes[labels[i]])
        })
        .collect()
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::param("k", "k must be >= 1"));
    }
    if n <= k {
        return Err(Error::param("k", format!("need more than k = {k} cases, got {n}")));
    }
    Ok(())
}

fn edit_rounds<D: Distance>(data: &Dataset, metric: &D, k: usize, max_rounds: usize) -> (Vec<usize>, Vec<Removal>) {
    let mut active: Vec<usize> = (0..data.len()).collect();
    let mut removals = Vec::new();
    for round in 1..=max_rounds {
        if active.len() <= k {
            break;
        }
        let marked = disagreeing(data, metric, &active, k);
        if marked.is_empty() {
            break;
        }
        removals.extend(marked.iter().map(|&index| Removal {
            index,
            reason: format!("outvoted by its {k} nearest neighbours"),
            round,
        }));
        active.retain(|i| marked.binary_search(i).is_err());
    }
    (active, removals)
}

/// Wilson's edited nearest neighbour: one pass over the original set that
/// marks every outvoted case, then removes all marked cases at once.
pub fn enn<D: Distance>(data: &Dataset, metric: &D, k: usize) -> Result<EditedSet> {
    check_k(data.len(), k)?;
    let (retained, removals) = edit_rounds(data, metric, k, 1);
    Ok(EditedSet {
        algorithm: "enn".into(),
        parameters: json!({ "k": k }),
        n_input: data.len(),
        retained,
        removals,
    })
}

/// Repeated ENN on the survivors until a pass removes nothing.
pub fn renn<D: Distance>(data: &Dataset, metric: &D, k: usize) -> Result<EditedSet> {
    check_k(data.len(), k)?;
    let (retained, removals) = edit_rounds(data, metric, k, data.len());
    Ok(EditedSet {
        algorithm: "renn".into(),
        parameters: json!({ "k": k }),
        n_input: data.len(),
        retained,
        removals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Matrix;
    use crate::metrics::MetricConfig;
    use crate::synth;

    fn euclid() -> MetricConfig {
        MetricConfig::euclidean()
    }

    fn single_class(n: usize) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64, (i * i % 7) as f64]).collect();
        Dataset::from_numeric(Matrix::from_rows(&rows).unwrap(), vec![0; n]).unwrap()
    }

    #[test]
    fn cnn_keeps_one_case_of_a_single_class() {
        let e = cnn(&single_class(30), &euclid(), 1).unwrap();
        assert_eq!(e.retained.len(), 1);
        assert_eq!(e.removals.len(), 29);
    }

    #[test]
    fn cnn_condenses_separated_clusters() {
        let data = synth::two_blobs(400, 2, 12.0, 3);
        let e = cnn(&data, &euclid(), 7).unwrap();
        assert!(e.retained.len() < 40, "{}", e.retained.len());
        assert!(is_consistent(&data, &euclid(), &e.retained));
    }

    #[test]
    fn cnn_keeps_noise() {
        let (data, flipped) = synth::flip_labels(&synth::two_blobs(400, 2, 8.0, 4), 0.1, 5);
        let e = cnn(&data, &euclid(), 1).unwrap();
        // a flip only escapes when an earlier flip nearby already votes for it
        let kept = flipped.iter().filter(|i| e.retained.contains(i)).count();
        assert!(kept * 10 >= flipped.len() * 8, "{kept} of {}", flipped.len());
        let clean_kept = e.retained.len() - kept;
        assert!(clean_kept * 2 < data.len() - flipped.len());
    }

    #[test]
    fn cnn_is_seeded() {
        let data = synth::two_blobs(200, 2, 2.0, 6);
        assert_eq!(cnn(&data, &euclid(), 3).unwrap(), cnn(&data, &euclid(), 3).unwrap());
    }

    #[test]
    fn enn_leaves_homogeneous_data_alone() {
        let e = enn(&single_class(20), &euclid(), 3).unwrap();
        assert_eq!(e.retained.len(), 20);
        assert_eq!(renn(&single_class(20), &euclid(), 3).unwrap().retained.len(), 20);
    }

    #[test]
    fn enn_removes_one_planted_flip() {
        // 50-point class-0 grid with one class-1 point in the middle
        let mut rows: Vec<Vec<f64>> = (0..50).map(|i| vec![(i % 10) as f64, (i / 10) as f64]).collect();
        rows.push(vec![4.5, 2.5]);
        let mut labels = vec![0; 50];
        labels.push(1);
        let data = Dataset::from_numeric(Matrix::from_rows(&rows).unwrap(), labels).unwrap();
        let e = enn(&data, &euclid(), 3).unwrap();
        assert_eq!(e.removed(), vec![50]);
    }

    #[test]
    fn enn_needs_more_cases_than_k() {
        assert!(enn(&single_class(3), &euclid(), 3).is_err());
        assert!(enn(&single_class(3), &euclid(), 0).is_err());
    }

    #[test]
    fn renn_extends_enn() {
        for seed in 0..3 {
            let (data, _) = synth::flip_labels(&synth::two_blobs(300, 2, 1.5, seed), 0.1, seed);
            let once = enn(&data, &euclid(), 3).unwrap().removed();
            let rep = renn(&data, &euclid(), 3).unwrap();
            let all = rep.removed();
            assert!(once.iter().all(|i| all.contains(i)));
            assert!(rep.removals.iter().map(|r| r.round).max().unwrap_or(0) <= 300);
        }
    }

    #[test]
    fn crr_is_consistent_and_keeps_the_border() {
        // class 0 fills a 9×9 grid left of x = 9, class 1 the mirror image
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for x in 0..18 {
            for y in 0..9 {
                rows.push(vec![x as f64, y as f64]);
                labels.push(usize::from(x >= 9));
            }
        }
        let data = Dataset::from_numeric(Matrix::from_rows(&rows).unwrap(), labels).unwrap();
        let e = crr(&data, &euclid()).unwrap();
        assert!(is_consistent(&data, &euclid(), &e.retained));
        assert!(e.retained.len() < rows.len() / 4);
        // the far-left column is interior to class 0 and fully removable
        let far: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][0] == 0.0).collect();
        assert!(far.iter().all(|i| !e.retained.contains(i)));
        // the two columns facing each other are where the decision is made
        let border = e.retained.iter().filter(|&&i| rows[i][0] == 8.0 || rows[i][0] == 9.0).count();
        assert!(border * 2 >= e.retained.len(), "{:?}", e.retained);
    }

    #[test]
    fn crr_single_class_is_small() {
        let data = single_class(25);
        let e = crr(&data, &euclid()).unwrap();
        assert!(e.retained.len() <= 2);
        assert!(is_consistent(&data, &euclid(), &e.retained));
    }

    #[test]
    fn edited_set_round_trips_through_json() {
        let e = enn(&single_class(10), &euclid(), 1).unwrap();
        let text = serde_json::to_string(&e).unwrap();
        assert_eq!(serde_json::from_str::<EditedSet>(&text).unwrap(), e);
    }
}
