//! Neighbour search: exhaustive scan, kd-tree, ball tree and an approximate
//! random-projection forest.

mod balltree;
mod brute;
mod kdtree;
mod rpforest;

pub use balltree::BallTree;
pub use brute::BruteForce;
pub use kdtree::KdTree;
pub use rpforest::RpForest;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::metrics::MetricConfig;

pub const DEFAULT_LEAF_SIZE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbour {
    pub index: usize,
    pub distance: f64,
}

/// Up to `k` neighbours sorted by ascending distance (ties by index).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NeighbourList {
    entries: Vec<Neighbour>,
}

impl NeighbourList {
    /// Sorts the given entries; panics on duplicate indices.
    pub fn from_entries(mut entries: Vec<Neighbour>) -> Self {
        entries.sort_by(|a, b| {
            a.distance
                .total_cmp(&b.distance)
                .then(a.index.cmp(&b.index))
        });
        let mut seen: Vec<usize> = entries.iter().map(|e| e.index).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), entries.len(), "neighbour indices must be distinct");
        NeighbourList { entries }
    }

    pub fn entries(&self) -> &[Neighbour] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.index).collect()
    }

    pub fn distances(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.distance).collect()
    }

    /// Distance of the farthest returned neighbour.
    pub fn kth_distance(&self) -> Option<f64> {
        self.entries.last().map(|e| e.distance)
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    key: f64,
    index: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then(self.index.cmp(&other.index))
    }
}

/// Bounded max-heap keeping the `k` smallest `(key, index)` pairs.
pub(crate) struct KBest {
    k: usize,
    heap: BinaryHeap<Candidate>,
}

impl KBest {
    pub(crate) fn new(k: usize) -> Self {
        KBest {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    /// Current k-th key, infinite until `k` candidates are held.
    #[inline]
    pub(crate) fn worst(&self) -> f64 {
        if self.heap.len() < self.k {
            f64::INFINITY
        } else {
            self.heap.peek().map_or(f64::INFINITY, |c| c.key)
        }
    }

    #[inline]
    pub(crate) fn push(&mut self, key: f64, index: usize) {
        let c = Candidate { key, index };
        if self.heap.len() < self.k {
            self.heap.push(c);
        } else if let Some(top) = self.heap.peek() {
            if c < *top {
                self.heap.pop();
                self.heap.push(c);
            }
        }
    }

    /// Converts held keys to distances with `finish` and sorts.
    pub(crate) fn into_list(self, finish: impl Fn(f64) -> f64) -> NeighbourList {
        let entries = self
            .heap
            .into_iter()
            .map(|c| Neighbour {
                index: c.index,
                distance: finish(c.key),
            })
            .collect();
        NeighbourList::from_entries(entries)
    }
}

pub(crate) fn check_query(q: &[f64], k: usize, dim: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::param("k", "k must be >= 1"));
    }
    if q.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: q.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_build(data: &Matrix, leaf_size: usize) -> Result<()> {
    if data.rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if leaf_size < 1 {
        return Err(Error::param("leaf_size", "leaf size must be >= 1"));
    }
    for (i, row) in data.iter_rows().enumerate() {
        if let Some(f) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, feature: f });
        }
    }
    Ok(())
}

/// Any structure that answers k-nearest-neighbour queries over its rows.
pub trait NeighbourIndex: Send + Sync {
    fn knn(&self, q: &[f64], k: usize) -> Result<NeighbourList>;
    fn len(&self) -> usize;
    fn dim(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexKind {
    #[default]
    Brute,
    Kd,
    Ball,
    Rp,
}

impl IndexKind {
    pub fn name(self) -> &'static str {
        match self {
            IndexKind::Brute => "brute",
            IndexKind::Kd => "kd",
            IndexKind::Ball => "ball",
            IndexKind::Rp => "rp",
        }
    }

    pub fn is_exact(self) -> bool {
        !matches!(self, IndexKind::Rp)
    }
}

impl std::str::FromStr for IndexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(IndexKind::Brute),
            "kd" | "kdtree" => Ok(IndexKind::Kd),
            "ball" | "balltree" => Ok(IndexKind::Ball),
            "rp" | "rpforest" => Ok(IndexKind::Rp),
            other => Err(Error::param("index", format!("unknown index kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexConfig {
    pub kind: IndexKind,
    pub leaf_size: usize,
    /// Forest size (rp only).
    pub n_trees: usize,
    /// Candidate budget per query (rp only).
    pub budget: usize,
    /// Seeds ball-tree pivots and forest projections.
    pub seed: u64,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            kind: IndexKind::Brute,
            leaf_size: DEFAULT_LEAF_SIZE,
            n_trees: 10,
            budget: 400,
            seed: 42,
        }
    }
}

impl IndexConfig {
    pub fn new(kind: IndexKind) -> Self {
        IndexConfig {
            kind,
            ..Default::default()
        }
    }
}

/// A built index of any kind.
pub enum Index {
    Brute(BruteForce<MetricConfig>),
    Kd(KdTree),
    Ball(BallTree<MetricConfig>),
    Rp(RpForest),
}

impl Index {
    pub fn build(config: &IndexConfig, data: Matrix, metric: MetricConfig) -> Result<Index> {
        Ok(match config.kind {
            IndexKind::Brute => Index::Brute(BruteForce::new(data, metric)?),
            IndexKind::Kd => Index::Kd(KdTree::build(data, &metric, config.leaf_size)?),
            IndexKind::Ball => {
                Index::Ball(BallTree::build(data, metric, config.leaf_size, config.seed)?)
            }
            IndexKind::Rp => Index::Rp(
                RpForest::build(data, metric, config.n_trees, config.leaf_size, config.seed)?
                    .with_budget(config.budget),
            ),
        })
    }

    pub fn kind(&self) -> IndexKind {
        match self {
            Index::Brute(_) => IndexKind::Brute,
            Index::Kd(_) => IndexKind::Kd,
            Index::Ball(_) => IndexKind::Ball,
            Index::Rp(_) => IndexKind::Rp,
        }
    }

    fn inner(&self) -> &dyn NeighbourIndex {
        match self {
            Index::Brute(i) => i,
            Index::Kd(i) => i,
            Index::Ball(i) => i,
            Index::Rp(i) => i,
        }
    }
}

impl NeighbourIndex for Index {
    fn knn(&self, q: &[f64], k: usize) -> Result<NeighbourList> {
        self.inner().knn(q, k)
    }

    fn len(&self) -> usize {
        self.inner().len()
    }

    fn dim(&self) -> usize {
        self.inner().dim()
    }
}
