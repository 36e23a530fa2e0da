use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_build, check_query, KBest, NeighbourIndex, NeighbourList};
use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::metrics::Distance;

#[derive(Debug, Clone)]
struct Ball {
    centre: Vec<f64>,
    radius: f64,
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

/// Metric tree of nested balls, built top-down.
///
/// A node is split around two pivots that approximate its farthest pair: a
/// random member `a`, the member `b` farthest from `a`, and the member `c`
/// farthest from `b`. Each sample joins the closer pivot. Centres are member
/// centroids and radii the largest member distance, so containment holds by
/// construction. Only true metrics are accepted because pruning relies on the
/// triangle inequality.
pub struct BallTree<D> {
    points: Matrix,
    perm: Vec<usize>,
    nodes: Vec<Ball>,
    metric: D,
    leaf_size: usize,
}

impl<D: Distance> BallTree<D> {
    pub fn build(data: Matrix, metric: D, leaf_size: usize, seed: u64) -> Result<Self> {
        if !metric.is_metric() {
            return Err(Error::NotAMetric(metric.name()));
        }
        check_build(&data, leaf_size)?;
        let n = data.rows();
        let mut b = Builder {
            data: &data,
            metric: &metric,
            perm: (0..n).collect(),
            nodes: Vec::new(),
            leaf_size,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        b.build(0, n);
        let Builder { perm, nodes, .. } = b;
        let points = data.select_rows(&perm);
        Ok(BallTree {
            points,
            perm,
            nodes,
            metric,
            leaf_size,
        })
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// `(centre, radius, original rows)` for every node, root first.
    pub fn balls(&self) -> Vec<(Vec<f64>, f64, Vec<usize>)> {
        self.nodes
            .iter()
            .map(|b| (b.centre.clone(), b.radius, self.perm[b.start..b.end].to_vec()))
            .collect()
    }

    /// Rows of the root's two children, if the root was split.
    pub fn root_children(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        let (l, r) = self.nodes[0].children?;
        let rows = |id: usize| self.perm[self.nodes[id].start..self.nodes[id].end].to_vec();
        Some((rows(l), rows(r)))
    }

    /// Smallest possible distance from `q` to a member of the ball.
    #[inline]
    fn lower_bound(&self, id: usize, q: &[f64]) -> (f64, f64) {
        let ball = &self.nodes[id];
        let dc = self.metric.distance(q, &ball.centre);
        ((dc - ball.radius).max(0.0), dc)
    }

    fn search(&self, id: usize, bound: (f64, f64), q: &[f64], best: &mut KBest) {
        if prunable(bound, self.nodes[id].radius, best.worst()) {
            return;
        }
        let ball = &self.nodes[id];
        match ball.children {
            None => {
                for p in ball.start..ball.end {
                    best.push(self.metric.distance(q, self.points.row(p)), self.perm[p]);
                }
            }
            Some((l, r)) => {
                let bl = self.lower_bound(l, q);
                let br = self.lower_bound(r, q);
                if bl.1 <= br.1 {
                    self.search(l, bl, q, best);
                    self.search(r, br, q, best);
                } else {
                    self.search(r, br, q, best);
                    self.search(l, bl, q, best);
                }
            }
        }
    }
}

/// The bound `d(q, c) − r` can be off by a few ulps of `d(q, c)` and `r`, so
/// a small absolute slack keeps ties at the k-th distance from being lost.
#[inline]
fn prunable((lb, dc): (f64, f64), radius: f64, worst: f64) -> bool {
    lb > worst + 1e-12 * (1.0 + dc + radius)
}

impl<D: Distance> NeighbourIndex for BallTree<D> {
    fn knn(&self, q: &[f64], k: usize) -> Result<NeighbourList> {
        check_query(q, k, self.points.cols())?;
        let mut best = KBest::new(k);
        let root = self.lower_bound(0, q);
        self.search(0, root, q, &mut best);
        Ok(best.into_list(|d| d))
    }

    fn len(&self) -> usize {
        self.points.rows()
    }

    fn dim(&self) -> usize {
        self.points.cols()
    }
}

struct Builder<'a, D> {
    data: &'a Matrix,
    metric: &'a D,
    perm: Vec<usize>,
    nodes: Vec<Ball>,
    leaf_size: usize,
    rng: ChaCha8Rng,
}

impl<D: Distance> Builder<'_, D> {
    fn build(&mut self, start: usize, end: usize) -> usize {
        let centre = self.centroid(start, end);
        let radius = self.perm[start..end]
            .iter()
            .map(|&i| self.metric.distance(&centre, self.data.row(i)))
            .fold(0.0, f64::max);
        let id = self.nodes.len();
        self.nodes.push(Ball {
            centre,
            radius,
            start,
            end,
            children: None,
        });
        if end - start <= self.leaf_size {
            return id;
        }
        let Some(mid) = self.split(start, end) else {
            return id;
        };
        let l = self.build(start, mid);
        let r = self.build(mid, end);
        self.nodes[id].children = Some((l, r));
        id
    }

    fn centroid(&self, start: usize, end: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.data.cols()];
        for &i in &self.perm[start..end] {
            for (acc, v) in c.iter_mut().zip(self.data.row(i)) {
                *acc += v;
            }
        }
        let m = (end - start) as f64;
        c.iter_mut().for_each(|v| *v /= m);
        c
    }

    fn farthest_from(&self, from: usize, start: usize, end: usize) -> (usize, f64) {
        let origin = self.data.row(from);
        let mut best = (from, 0.0);
        for &i in &self.perm[start..end] {
            let d = self.metric.distance(origin, self.data.row(i));
            if d > best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// Reorders `perm[start..end]` so rows closer to pivot `b` come first.
    /// `None` when all members coincide.
    fn split(&mut self, start: usize, end: usize) -> Option<usize> {
        let a = self.perm[self.rng.random_range(start..end)];
        let (b, _) = self.farthest_from(a, start, end);
        let (c, spread) = self.farthest_from(b, start, end);
        if spread <= 0.0 {
            return None;
        }
        let (data, metric) = (self.data, self.metric);
        let (pb, pc) = (data.row(b), data.row(c));
        let slice = &mut self.perm[start..end];
        let mut next = 0;
        for i in 0..slice.len() {
            let x = data.row(slice[i]);
            if metric.distance(x, pb) <= metric.distance(x, pc) {
                slice.swap(next, i);
                next += 1;
            }
        }
        // b lands left and c right, so both halves are non-empty
        Some(start + next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::BruteForce;
    use crate::metrics::{MetricConfig, MetricKind};
    use crate::xmetrics::Dtw;

    fn uniform(n: usize, d: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::new((0..n * d).map(|_| rng.random::<f64>()).collect(), d).unwrap()
    }

    #[test]
    fn single_point_is_zero_radius_leaf() {
        let t = BallTree::build(Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap(), MetricConfig::euclidean(), 4, 0)
            .unwrap();
        let balls = t.balls();
        assert_eq!(balls.len(), 1);
        assert_eq!(balls[0].1, 0.0);
    }

    #[test]
    fn separated_clusters_split_at_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| {
                let off = if i < 30 { 0.0 } else { 100.0 };
                vec![off + rng.random::<f64>(), off + rng.random::<f64>()]
            })
            .collect();
        let t = BallTree::build(Matrix::from_rows(&rows).unwrap(), MetricConfig::euclidean(), 8, 1).unwrap();
        let (mut l, mut r) = t.root_children().unwrap();
        l.sort_unstable();
        r.sort_unstable();
        let (first, second): (Vec<usize>, Vec<usize>) = ((0..30).collect(), (30..60).collect());
        assert!((l == first && r == second) || (l == second && r == first));
    }

    #[test]
    fn containment_holds_everywhere() {
        let data = uniform(500, 3, 9);
        let metric = MetricConfig::new(MetricKind::Minkowski { p: 1.0 }).unwrap();
        let t = BallTree::build(data.clone(), metric.clone(), 7, 2).unwrap();
        for (centre, radius, rows) in t.balls() {
            for i in rows {
                assert!(metric.distance(&centre, data.row(i)) <= radius);
            }
        }
    }

    #[test]
    fn matches_brute_force() {
        let data = uniform(300, 4, 10);
        let metric = MetricConfig::new(MetricKind::Chebyshev).unwrap();
        let t = BallTree::build(data.clone(), metric.clone(), 6, 3).unwrap();
        let b = BruteForce::new(data, metric).unwrap();
        for q in uniform(40, 4, 11).iter_rows() {
            for k in [1, 5, 300] {
                assert_eq!(t.knn(q, k).unwrap().distances(), b.knn(q, k).unwrap().distances());
            }
        }
    }

    #[test]
    fn refuses_dtw() {
        assert!(matches!(
            BallTree::build(uniform(10, 3, 0), Dtw::default(), 4, 0),
            Err(Error::NotAMetric(_))
        ));
    }

    #[test]
    fn duplicates_do_not_recurse_forever() {
        let data = Matrix::from_rows(&vec![vec![1.0, 1.0]; 50]).unwrap();
        let t = BallTree::build(data, MetricConfig::euclidean(), 4, 0).unwrap();
        assert_eq!(t.knn(&[1.0, 1.0], 3).unwrap().distances(), vec![0.0; 3]);
    }
}
