use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A set of weighted cluster modes, a histogram without fixed bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signature {
    modes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl Signature {
    pub fn new(clusters: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if clusters.is_empty() {
            return Err(Error::EmptyInput);
        }
        let dim = clusters[0].0.len();
        let mut modes = Vec::with_capacity(clusters.len());
        let mut weights = Vec::with_capacity(clusters.len());
        for (mode, w) in clusters {
            if mode.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: mode.len(),
                });
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::param("weight", format!("cluster weight {w} must be > 0")));
            }
            if mode.iter().any(|v| !v.is_finite()) {
                return Err(Error::param("mode", "cluster modes must be finite"));
            }
            modes.push(mode);
            weights.push(w);
        }
        Ok(Signature { modes, weights })
    }

    pub fn modes(&self) -> &[Vec<f64>] {
        &self.modes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.modes[0].len()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Weight-averaged mode.
    pub fn centroid(&self) -> Vec<f64> {
        let total = self.total_weight();
        let mut c = vec![0.0; self.dim()];
        for (m, w) in self.modes.iter().zip(&self.weights) {
            for (ci, mi) in c.iter_mut().zip(m) {
                *ci += w * mi / total;
            }
        }
        c
    }
}

/// Flow `f_jk` from source cluster `j` to sink cluster `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowMatrix {
    rows: usize,
    cols: usize,
    flows: Vec<f64>,
}

impl FlowMatrix {
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.flows[j * self.cols + k]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn total(&self) -> f64 {
        self.flows.iter().sum()
    }

    pub fn row_sum(&self, j: usize) -> f64 {
        (0..self.cols).map(|k| self.get(j, k)).sum()
    }

    pub fn col_sum(&self, k: usize) -> f64 {
        (0..self.rows).map(|j| self.get(j, k)).sum()
    }

    /// Non-zero flows as `(j, k, amount)`.
    pub fn nonzero(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for j in 0..self.rows {
            for k in 0..self.cols {
                let f = self.get(j, k);
                if f > 0.0 {
                    out.push((j, k, f));
                }
            }
        }
        out
    }
}

struct Edge {
    to: usize,
    cap: f64,
    cost: f64,
}

/// Residual network for successive-shortest-path min-cost flow. Edges come in
/// pairs, so edge `e ^ 1` is the reverse of edge `e`.
struct Network {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Network {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: f64, cost: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge {
            to: from,
            cap: 0.0,
            cost: -cost,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Bellman–Ford shortest path over edges with residual capacity above
    /// `eps`; returns the predecessor edge of each node.
    fn shortest_path(&self, source: usize, eps: f64) -> Vec<Option<usize>> {
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![None; n];
        dist[source] = 0.0;
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                if dist[u].is_infinite() {
                    continue;
                }
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap > eps {
                        let nd = dist[u] + edge.cost;
                        // strict improvement beyond round-off
                        if nd < dist[edge.to] - 1e-15 * (1.0 + nd.abs()) {
                            dist[edge.to] = nd;
                            pred[edge.to] = Some(e);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        pred
    }
}

/// Exact min-cost transportation: ships `min(Σ supply, Σ demand)` units from
/// supply to demand nodes minimising `Σ cost_jk f_jk`. `cost` is row-major
/// `supply.len() × demand.len()`. Returns the total cost and the flows.
pub fn transport(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<(f64, FlowMatrix)> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 {
        return Err(Error::EmptyInput);
    }
    if cost.len() != m * n {
        return Err(Error::DimensionMismatch {
            expected: m * n,
            found: cost.len(),
        });
    }
    if let Some(&c) = cost.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(Error::BadGroundDistance(c));
    }
    let source = 0;
    let sink = m + n + 1;
    let mut net = Network::new(m + n + 2);
    for (j, &s) in supply.iter().enumerate() {
        net.add_edge(source, 1 + j, s, 0.0);
    }
    let mut cell_edges = Vec::with_capacity(m * n);
    for j in 0..m {
        for k in 0..n {
            cell_edges.push(net.add_edge(1 + j, 1 + m + k, f64::INFINITY, cost[j * n + k]));
        }
    }
    for (k, &d) in demand.iter().enumerate() {
        net.add_edge(1 + m + k, sink, d, 0.0);
    }

    let target = supply.iter().sum::<f64>().min(demand.iter().sum());
    let eps = 1e-13 * target.max(1.0);
    let mut shipped = 0.0;
    while target - shipped > eps {
        let pred = net.shortest_path(source, eps);
        if pred[sink].is_none() {
            break;
        }
        let mut push = target - shipped;
        let mut v = sink;
        while let Some(e) = pred[v] {
            push = push.min(net.edges[e].cap);
            v = net.edges[e ^ 1].to;
        }
        let mut v = sink;
        while let Some(e) = pred[v] {
            net.edges[e].cap -= push;
            net.edges[e ^ 1].cap += push;
            v = net.edges[e ^ 1].to;
        }
        shipped += push;
    }

    // flow on a forward edge is the capacity of its reverse edge
    let flows: Vec<f64> = cell_edges.iter().map(|&e| net.edges[e ^ 1].cap).collect();
    let total_cost = flows.iter().zip(cost).map(|(f, c)| f * c).sum();
    Ok((total_cost, FlowMatrix { rows: m, cols: n, flows }))
}

/// Earth mover's distance: optimal transport cost divided by the total flow.
/// With unequal total weights the lighter signature is fully matched
/// (partial matching).
pub fn emd<G>(s: &Signature, q: &Signature, ground: G) -> Result<(f64, FlowMatrix)>
where
    G: Fn(&[f64], &[f64]) -> f64,
{
    if s.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: q.dim(),
        });
    }
    let mut cost = Vec::with_capacity(s.len() * q.len());
    for a in s.modes() {
        for b in q.modes() {
            let d = ground(a, b);
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::BadGroundDistance(d));
            }
            cost.push(d);
        }
    }
    let (work, flow) = transport(s.weights(), q.weights(), &cost)?;
    let total = flow.total();
    Ok((work / total, flow))
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// EMD with Euclidean ground distance between modes.
pub fn emd_euclidean(s: &Signature, q: &Signature) -> Result<(f64, FlowMatrix)> {
    emd(s, q, euclidean)
}
