use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{check_build, check_query, KBest, NeighbourIndex, NeighbourList};
use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::metrics::{Distance, MetricConfig};

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    /// Hyperplane `normal · x = offset`, with `normal` a unit vector stored
    /// at `normals[dir..dir + dim]`. Points with `normal · x <= offset` go
    /// left.
    Split {
        dir: usize,
        offset: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
struct RpTree {
    nodes: Vec<Node>,
    normals: Vec<f64>,
    items: Vec<usize>,
}

impl RpTree {
    fn margin(&self, dir: usize, offset: f64, q: &[f64]) -> f64 {
        let n = &self.normals[dir..dir + q.len()];
        n.iter().zip(q).map(|(a, b)| a * b).sum::<f64>() - offset
    }

    fn leaf_of(&self, q: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { .. } => return id,
                Node::Split { dir, offset, left, right } => {
                    id = if self.margin(dir, offset, q) <= 0.0 { left } else { right };
                }
            }
        }
    }
}

/// Forest of random-projection trees for approximate search.
///
/// Each split is the perpendicular bisector of two randomly drawn samples in
/// the node. A query descends every tree to its leaf ("defeatist" search),
/// then keeps opening the unexplored sides of splits in order of their
/// distance from the query, across all trees, until the candidate budget is
/// met. Candidates are re-ranked by the exact distance.
pub struct RpForest {
    data: Matrix,
    metric: MetricConfig,
    trees: Vec<RpTree>,
    leaf_size: usize,
    seed: u64,
    budget: usize,
}

impl RpForest {
    pub fn build(data: Matrix, metric: MetricConfig, n_trees: usize, leaf_size: usize, seed: u64) -> Result<Self> {
        if n_trees < 1 {
            return Err(Error::param("n_trees", "a forest needs at least one tree"));
        }
        check_build(&data, leaf_size)?;
        metric.validate(data.cols())?;
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let seeds: Vec<u64> = (0..n_trees).map(|_| master.random()).collect();
        let trees = seeds
            .into_par_iter()
            .map(|s| build_tree(&data, leaf_size, s))
            .collect();
        Ok(RpForest {
            data,
            metric,
            trees,
            leaf_size,
            seed,
            budget: 0,
        })
    }

    /// Default candidate budget used by [`NeighbourIndex::knn`].
    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    /// Leaf id of every sample in tree `t`.
    pub fn leaf_assignments(&self, t: usize) -> Vec<usize> {
        let tree = &self.trees[t];
        let mut out = vec![0; self.data.rows()];
        for (id, node) in tree.nodes.iter().enumerate() {
            if let Node::Leaf { start, end } = *node {
                for &i in &tree.items[start..end] {
                    out[i] = id;
                }
            }
        }
        out
    }

    /// Number of leaves in tree `t`.
    pub fn leaf_count(&self, t: usize) -> usize {
        self.trees[t]
            .nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Distinct candidate rows for `q`: every tree's descent leaf, then
    /// further leaves by increasing split margin until `budget` is reached.
    pub fn candidates(&self, q: &[f64], budget: usize) -> Vec<usize> {
        let mut seen = vec![false; self.data.rows()];
        let mut out = Vec::with_capacity(budget.max(self.leaf_size * self.trees.len()));
        let mut queue: BinaryHeap<Reverse<(Key, usize, usize)>> = BinaryHeap::new();
        for t in 0..self.trees.len() {
            queue.push(Reverse((Key(0.0), t, 0)));
        }
        while let Some(Reverse((Key(priority), t, mut id))) = queue.pop() {
            if priority > 0.0 && out.len() >= budget {
                break;
            }
            let tree = &self.trees[t];
            loop {
                match tree.nodes[id] {
                    Node::Leaf { start, end } => {
                        for &i in &tree.items[start..end] {
                            if !seen[i] {
                                seen[i] = true;
                                out.push(i);
                            }
                        }
                        break;
                    }
                    Node::Split { dir, offset, left, right } => {
                        let m = tree.margin(dir, offset, q);
                        let (near, far) = if m <= 0.0 { (left, right) } else { (right, left) };
                        queue.push(Reverse((Key(priority.max(m.abs())), t, far)));
                        id = near;
                    }
                }
            }
        }
        out
    }

    /// Approximate k-NN from at least `budget` candidates (fewer only when
    /// the forest holds fewer samples).
    pub fn ann_query(&self, q: &[f64], k: usize, budget: usize) -> Result<NeighbourList> {
        check_query(q, k, self.data.cols())?;
        let mut best = KBest::new(k);
        for i in self.candidates(q, budget) {
            best.push(self.metric.distance(q, self.data.row(i)), i);
        }
        Ok(best.into_list(|d| d))
    }

    /// Rows sharing `q`'s descent leaf in each tree, without expansion.
    pub fn defeatist_leaves(&self, q: &[f64]) -> Vec<Vec<usize>> {
        self.trees
            .iter()
            .map(|t| match t.nodes[t.leaf_of(q)] {
                Node::Leaf { start, end } => t.items[start..end].to_vec(),
                Node::Split { .. } => unreachable!(),
            })
            .collect()
    }
}

impl NeighbourIndex for RpForest {
    fn knn(&self, q: &[f64], k: usize) -> Result<NeighbourList> {
        self.ann_query(q, k, self.budget)
    }

    fn len(&self) -> usize {
        self.data.rows()
    }

    fn dim(&self) -> usize {
        self.data.cols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn build_tree(data: &Matrix, leaf_size: usize, seed: u64) -> RpTree {
    let mut tree = RpTree {
        nodes: Vec::new(),
        normals: Vec::new(),
        items: (0..data.rows()).collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    grow(&mut tree, data, 0, data.rows(), leaf_size, &mut rng);
    tree
}

fn grow(tree: &mut RpTree, data: &Matrix, start: usize, end: usize, leaf_size: usize, rng: &mut ChaCha8Rng) -> usize {
    let id = tree.nodes.len();
    tree.nodes.push(Node::Leaf { start, end });
    if end - start <= leaf_size {
        return id;
    }
    let Some((a, b)) = pick_pair(&tree.items[start..end], data, rng) else {
        return id;
    };
    let (pa, pb) = (data.row(a), data.row(b));
    let mut normal: Vec<f64> = pb.iter().zip(pa).map(|(y, x)| y - x).collect();
    let len = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
    normal.iter_mut().for_each(|v| *v /= len);
    let offset: f64 = normal
        .iter()
        .zip(pa.iter().zip(pb))
        .map(|(n, (x, y))| n * (x + y) / 2.0)
        .sum();
    let dir = tree.normals.len();
    tree.normals.extend_from_slice(&normal);

    let items = &mut tree.items[start..end];
    let mut next = 0;
    for i in 0..items.len() {
        let m = normal.iter().zip(data.row(items[i])).map(|(n, x)| n * x).sum::<f64>() - offset;
        if m <= 0.0 {
            items.swap(next, i);
            next += 1;
        }
    }
    if next == 0 || next == items.len() {
        // numerically degenerate cut (e.g. near-identical pivots)
        tree.normals.truncate(dir);
        return id;
    }
    let left = grow(tree, data, start, start + next, leaf_size, rng);
    let right = grow(tree, data, start + next, end, leaf_size, rng);
    tree.nodes[id] = Node::Split { dir, offset, left, right };
    id
}

/// Two members with different coordinates, drawn at random; falls back to a
/// scan when repeated draws hit duplicates.
fn pick_pair(items: &[usize], data: &Matrix, rng: &mut ChaCha8Rng) -> Option<(usize, usize)> {
    for _ in 0..8 {
        let i = rng.random_range(0..items.len());
        let mut j = rng.random_range(0..items.len() - 1);
        if j >= i {
            j += 1;
        }
        if data.row(items[i]) != data.row(items[j]) {
            return Some((items[i], items[j]));
        }
    }
    let first = items[0];
    items
        .iter()
        .find(|&&j| data.row(j) != data.row(first))
        .map(|&j| (first, j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::BruteForce;

    fn uniform(n: usize, d: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::new((0..n * d).map(|_| rng.random::<f64>()).collect(), d).unwrap()
    }

    #[test]
    fn zero_trees_rejected() {
        assert!(RpForest::build(uniform(10, 2, 0), MetricConfig::euclidean(), 0, 4, 1).is_err());
    }

    #[test]
    fn same_seed_same_trees() {
        let a = RpForest::build(uniform(100, 3, 1), MetricConfig::euclidean(), 1, 4, 7).unwrap();
        let b = RpForest::build(uniform(100, 3, 1), MetricConfig::euclidean(), 1, 4, 7).unwrap();
        assert_eq!(a.leaf_assignments(0), b.leaf_assignments(0));
    }

    #[test]
    fn different_seeds_differ() {
        let a = RpForest::build(uniform(100, 3, 1), MetricConfig::euclidean(), 1, 4, 7).unwrap();
        let b = RpForest::build(uniform(100, 3, 1), MetricConfig::euclidean(), 1, 4, 8).unwrap();
        assert_ne!(a.leaf_assignments(0), b.leaf_assignments(0));
    }

    #[test]
    fn small_data_gives_single_leaves() {
        let f = RpForest::build(uniform(10, 3, 1), MetricConfig::euclidean(), 3, 16, 7).unwrap();
        assert!((0..3).all(|t| f.leaf_count(t) == 1));
    }

    #[test]
    fn every_tree_partitions_all_samples() {
        let f = RpForest::build(uniform(500, 4, 2), MetricConfig::euclidean(), 4, 8, 3).unwrap();
        for t in 0..4 {
            let tree = &f.trees[t];
            let mut items = tree.items.clone();
            items.sort_unstable();
            assert_eq!(items, (0..500).collect::<Vec<_>>());
            assert!(f.leaf_count(t) >= 500 / 8);
        }
    }

    #[test]
    fn full_budget_is_exact() {
        let data = uniform(400, 5, 4);
        let f = RpForest::build(data.clone(), MetricConfig::euclidean(), 2, 8, 5).unwrap();
        let b = BruteForce::new(data, MetricConfig::euclidean()).unwrap();
        for q in uniform(20, 5, 6).iter_rows() {
            assert_eq!(f.ann_query(q, 5, 400).unwrap(), b.knn(q, 5).unwrap());
        }
    }

    #[test]
    fn degenerate_forest_is_brute_force() {
        let data = uniform(50, 3, 4);
        let f = RpForest::build(data.clone(), MetricConfig::euclidean(), 1, 50, 5).unwrap();
        let b = BruteForce::new(data, MetricConfig::euclidean()).unwrap();
        let q = [0.2, 0.4, 0.6];
        assert_eq!(f.ann_query(&q, 3, 0).unwrap(), b.knn(&q, 3).unwrap());
    }

    #[test]
    fn budget_bounds_candidates_from_below() {
        let f = RpForest::build(uniform(2000, 4, 4), MetricConfig::euclidean(), 3, 10, 5).unwrap();
        let c = f.candidates(&[0.5; 4], 300);
        assert!(c.len() >= 300);
        let mut d = c.clone();
        d.sort_unstable();
        d.dedup();
        assert_eq!(d.len(), c.len());
    }

    #[test]
    fn duplicates_stop_splitting() {
        let f = RpForest::build(Matrix::from_rows(&vec![vec![0.5, 0.5]; 40]).unwrap(), MetricConfig::euclidean(), 1, 4, 0)
            .unwrap();
        assert_eq!(f.leaf_count(0), 1);
    }
}
