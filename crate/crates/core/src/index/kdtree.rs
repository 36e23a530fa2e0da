use super::{check_build, check_query, KBest, NeighbourIndex, NeighbourList};
use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::metrics::{LpNorm, MetricConfig};

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        feature: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Axis-aligned binary partition for exact L_p search.
///
/// Each split uses the feature with the largest variance in the node and
/// cuts at its (lower) median; samples equal to the split value go left.
/// Every node keeps the tight bounding box of its samples, and search skips
/// a subtree once the box lies farther away than the current k-th candidate.
pub struct KdTree {
    /// Rows in leaf order.
    points: Matrix,
    /// Position in `points` → original row index.
    perm: Vec<usize>,
    nodes: Vec<Node>,
    /// Per node: `dim` lower bounds followed by `dim` upper bounds.
    boxes: Vec<f64>,
    norm: LpNorm,
    leaf_size: usize,
}

/// Work done by one query, for pruning audits and benchmarks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes_visited: usize,
    pub leaves_scanned: usize,
    pub distance_evals: usize,
}

impl KdTree {
    /// Builds over `data` for a metric with a coordinate-wise L_p form
    /// (Minkowski, Chebyshev, or all-numeric heterogeneous).
    pub fn build(data: Matrix, metric: &MetricConfig, leaf_size: usize) -> Result<Self> {
        check_build(&data, leaf_size)?;
        metric.validate(data.cols())?;
        let norm = metric
            .lp_norm()
            .ok_or_else(|| Error::UnsupportedMetric(format!("kd-tree needs an L_p metric, got {}", metric.kind().name())))?;
        let n = data.rows();
        let mut builder = Builder {
            data: &data,
            perm: (0..n).collect(),
            nodes: Vec::new(),
            boxes: Vec::new(),
            leaf_size,
        };
        builder.build(0, n);
        let Builder { perm, nodes, boxes, .. } = builder;
        let points = data.select_rows(&perm);
        Ok(KdTree {
            points,
            perm,
            nodes,
            boxes,
            norm,
            leaf_size,
        })
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Original row indices held by each leaf.
    pub fn leaves(&self) -> Vec<Vec<usize>> {
        self.nodes
            .iter()
            .filter_map(|n| match *n {
                Node::Leaf { start, end } => Some(self.perm[start..end].to_vec()),
                Node::Split { .. } => None,
            })
            .collect()
    }

    /// Every internal node as `(feature, split value, left rows, right rows)`.
    pub fn splits(&self) -> Vec<(usize, f64, Vec<usize>, Vec<usize>)> {
        let mut out = Vec::new();
        for node in &self.nodes {
            if let Node::Split { feature, value, left, right } = *node {
                out.push((feature, value, self.subtree_rows(left), self.subtree_rows(right)));
            }
        }
        out
    }

    fn subtree_rows(&self, id: usize) -> Vec<usize> {
        match self.nodes[id] {
            Node::Leaf { start, end } => self.perm[start..end].to_vec(),
            Node::Split { left, right, .. } => {
                let mut v = self.subtree_rows(left);
                v.extend(self.subtree_rows(right));
                v
            }
        }
    }

    fn descend(&self, q: &[f64]) -> (usize, usize) {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { start, end } => return (start, end),
                Node::Split { feature, value, left, right } => {
                    id = if q[feature] <= value { left } else { right };
                }
            }
        }
    }

    /// Rows in the leaf reached by plain descent, without backtracking.
    pub fn locate_leaf(&self, q: &[f64]) -> Result<Vec<usize>> {
        check_query(q, 1, self.points.cols())?;
        let (start, end) = self.descend(q);
        Ok(self.perm[start..end].to_vec())
    }

    /// Nearest distance within the descent leaf: the initial upper bound on
    /// the true nearest-neighbour distance.
    pub fn leaf_bound(&self, q: &[f64]) -> Result<f64> {
        check_query(q, 1, self.points.cols())?;
        let (start, end) = self.descend(q);
        Ok((start..end)
            .map(|p| self.norm.distance(q, self.points.row(p)))
            .fold(f64::INFINITY, f64::min))
    }

    /// Lower bound (reduced form) on the distance from `q` to any point in
    /// the node's box. Each coordinate gap is no larger than the matching
    /// difference to a point inside, so the bound never exceeds a true
    /// reduced distance.
    #[inline]
    fn box_bound(&self, id: usize, q: &[f64]) -> f64 {
        let d = q.len();
        let lo = &self.boxes[2 * d * id..2 * d * id + d];
        let hi = &self.boxes[2 * d * id + d..2 * d * (id + 1)];
        let mut acc = 0.0;
        for f in 0..d {
            let v = q[f];
            let gap = if v < lo[f] {
                lo[f] - v
            } else if v > hi[f] {
                v - hi[f]
            } else {
                continue;
            };
            acc = self.norm.combine(acc, self.norm.term(f, gap));
        }
        acc
    }

    fn search(&self, id: usize, q: &[f64], best: &mut KBest, stats: &mut SearchStats) {
        stats.nodes_visited += 1;
        match self.nodes[id] {
            Node::Leaf { start, end } => {
                stats.leaves_scanned += 1;
                stats.distance_evals += end - start;
                for p in start..end {
                    best.push(self.norm.reduced(q, self.points.row(p)), self.perm[p]);
                }
            }
            Node::Split { left, right, .. } => {
                let bl = self.box_bound(left, q);
                let br = self.box_bound(right, q);
                let order = if bl <= br { [(left, bl), (right, br)] } else { [(right, br), (left, bl)] };
                for (child, bound) in order {
                    if !prunable(bound, best.worst()) {
                        self.search(child, q, best, stats);
                    }
                }
            }
        }
    }

    /// Exact k-NN plus the work it took.
    pub fn knn_with_stats(&self, q: &[f64], k: usize) -> Result<(NeighbourList, SearchStats)> {
        check_query(q, k, self.points.cols())?;
        let mut best = KBest::new(k);
        let mut stats = SearchStats::default();
        self.search(0, q, &mut best, &mut stats);
        let norm = &self.norm;
        Ok((best.into_list(|r| norm.finish(r)), stats))
    }
}

/// Skip only when the bound is clearly beyond the current k-th key; the
/// relative slack absorbs rounding in `powf` for general exponents.
#[inline]
fn prunable(bound: f64, worst: f64) -> bool {
    bound > worst * (1.0 + 1e-12)
}

impl NeighbourIndex for KdTree {
    fn knn(&self, q: &[f64], k: usize) -> Result<NeighbourList> {
        self.knn_with_stats(q, k).map(|(list, _)| list)
    }

    fn len(&self) -> usize {
        self.points.rows()
    }

    fn dim(&self) -> usize {
        self.points.cols()
    }
}

struct Builder<'a> {
    data: &'a Matrix,
    perm: Vec<usize>,
    nodes: Vec<Node>,
    boxes: Vec<f64>,
    leaf_size: usize,
}

impl Builder<'_> {
    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { start, end });
        self.push_box(start, end);
        if end - start <= self.leaf_size {
            return id;
        }
        let Some(feature) = self.widest_feature(start, end) else {
            return id;
        };
        let (value, mid) = self.partition(feature, start, end);
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split { feature, value, left, right };
        id
    }

    fn push_box(&mut self, start: usize, end: usize) {
        let d = self.data.cols();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for &i in &self.perm[start..end] {
            for (f, &v) in self.data.row(i).iter().enumerate() {
                lo[f] = lo[f].min(v);
                hi[f] = hi[f].max(v);
            }
        }
        self.boxes.extend(lo);
        self.boxes.extend(hi);
    }

    /// Feature of largest variance; `None` when every feature is constant.
    fn widest_feature(&self, start: usize, end: usize) -> Option<usize> {
        let d = self.data.cols();
        let m = (end - start) as f64;
        let mut mean = vec![0.0; d];
        for &i in &self.perm[start..end] {
            for (acc, v) in mean.iter_mut().zip(self.data.row(i)) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= m);
        let mut var = vec![0.0; d];
        for &i in &self.perm[start..end] {
            for ((acc, v), mu) in var.iter_mut().zip(self.data.row(i)).zip(&mean) {
                *acc += (v - mu) * (v - mu);
            }
        }
        let (f, &v) = var
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))?;
        (v > 0.0).then_some(f)
    }

    /// Moves rows with value ≤ median to the front; returns the split value
    /// and the first position of the right half.
    fn partition(&mut self, feature: usize, start: usize, end: usize) -> (f64, usize) {
        let data = self.data;
        let slice = &mut self.perm[start..end];
        let mid = (slice.len() - 1) / 2;
        slice.select_nth_unstable_by(mid, |&a, &b| {
            data.get(a, feature).total_cmp(&data.get(b, feature))
        });
        let mut value = data.get(slice[mid], feature);
        let mut split = partition_by(slice, |i| data.get(i, feature) <= value);
        if split == slice.len() {
            // the median is also the maximum: cut just below it instead
            value = slice
                .iter()
                .map(|&i| data.get(i, feature))
                .filter(|&v| v < value)
                .fold(f64::NEG_INFINITY, f64::max);
            split = partition_by(slice, |i| data.get(i, feature) <= value);
        }
        (value, start + split)
    }
}

fn partition_by(slice: &mut [usize], pred: impl Fn(usize) -> bool) -> usize {
    let mut next = 0;
    for i in 0..slice.len() {
        if pred(slice[i]) {
            slice.swap(next, i);
            next += 1;
        }
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::BruteForce;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform(n: usize, d: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::new((0..n * d).map(|_| rng.random::<f64>()).collect(), d).unwrap()
    }

    #[test]
    fn small_data_is_one_leaf() {
        let t = KdTree::build(uniform(10, 3, 1), &MetricConfig::euclidean(), 16).unwrap();
        assert_eq!(t.depth(), 0);
        assert_eq!(t.leaves().len(), 1);
    }

    #[test]
    fn leaves_partition_and_respect_capacity() {
        let t = KdTree::build(uniform(1000, 2, 2), &MetricConfig::euclidean(), 16).unwrap();
        let mut all: Vec<usize> = t.leaves().concat();
        assert!(t.leaves().iter().all(|l| l.len() <= 16 && !l.is_empty()));
        all.sort_unstable();
        assert_eq!(all, (0..1000).collect::<Vec<_>>());
        // ceil(log2(1000 / 16)) + 1
        assert!(t.depth() <= 7, "depth {}", t.depth());
    }

    #[test]
    fn split_invariants() {
        let data = uniform(300, 4, 3);
        let t = KdTree::build(data.clone(), &MetricConfig::euclidean(), 8).unwrap();
        for (f, v, left, right) in t.splits() {
            assert!(left.iter().all(|&i| data.get(i, f) <= v));
            assert!(right.iter().all(|&i| data.get(i, f) > v));
            let mut vals: Vec<f64> = left.iter().chain(&right).map(|&i| data.get(i, f)).collect();
            vals.sort_by(f64::total_cmp);
            assert_eq!(v, vals[(vals.len() - 1) / 2]);
        }
    }

    #[test]
    fn duplicate_heavy_feature_still_splits() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![if i < 35 { 1.0 } else { i as f64 }]).collect();
        let t = KdTree::build(Matrix::from_rows(&rows).unwrap(), &MetricConfig::euclidean(), 4).unwrap();
        let mut all: Vec<usize> = t.leaves().concat();
        all.sort_unstable();
        assert_eq!(all.len(), 40);
    }

    #[test]
    fn matches_brute_force_on_small_sets() {
        for p in [1.0, 2.0, 3.0] {
            let metric = MetricConfig::new(crate::metrics::MetricKind::Minkowski { p }).unwrap();
            let data = uniform(200, 3, 4);
            let t = KdTree::build(data.clone(), &metric, 5).unwrap();
            let b = BruteForce::new(data, metric.clone()).unwrap();
            let queries = uniform(50, 3, 5);
            for q in queries.iter_rows() {
                for k in [1, 4, 200] {
                    assert_eq!(t.knn(q, k).unwrap().distances(), b.knn(q, k).unwrap().distances());
                }
            }
        }
    }

    #[test]
    fn pruning_skips_work_in_low_dimensions() {
        let t = KdTree::build(uniform(5000, 2, 6), &MetricConfig::euclidean(), 16).unwrap();
        let (_, stats) = t.knn_with_stats(&[0.5, 0.5], 1).unwrap();
        assert!(stats.distance_evals < 200, "{stats:?}");
    }

    #[test]
    fn refuses_non_lp_metrics() {
        let cos = MetricConfig::new(crate::metrics::MetricKind::Cosine).unwrap();
        assert!(matches!(
            KdTree::build(uniform(10, 2, 0), &cos, 4),
            Err(Error::UnsupportedMetric(_))
        ));
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        let m = MetricConfig::euclidean();
        assert!(KdTree::build(Matrix::new(vec![], 2).unwrap(), &m, 4).is_err());
        let bad = Matrix::from_rows(&[vec![0.0, f64::NAN]]).unwrap();
        assert!(matches!(KdTree::build(bad, &m, 4), Err(Error::NonFinite { row: 0, feature: 1 })));
    }
}
