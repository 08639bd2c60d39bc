//! Undirected graphs in CSR form, GCN propagation weights, multi-source
//! BFS and the split of unlabeled nodes by hop distance.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::math;
use crate::tensor::DenseMatrix;

pub type NodeId = usize;

/// Hop distance of a node that no source can reach.
pub const UNREACHABLE: u32 = u32::MAX;

/// Immutable undirected simple graph.
///
/// Both directions of every edge are stored; neighbor lists are strictly
/// increasing and never contain the node itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl Graph {
    /// Builds a graph from an arbitrary edge list. Duplicates, reversed
    /// duplicates and self-loops are accepted and dropped.
    pub fn from_edges(num_nodes: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut arcs = Vec::with_capacity(edges.len() * 2);
        for &(u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::EdgeOutOfRange { u, v, num_nodes });
            }
            if u != v {
                arcs.push((u, v));
                arcs.push((v, u));
            }
        }
        arcs.sort_unstable();
        arcs.dedup();

        let mut offsets = vec![0usize; num_nodes + 1];
        for &(u, _) in &arcs {
            offsets[u + 1] += 1;
        }
        for i in 0..num_nodes {
            offsets[i + 1] += offsets[i];
        }
        let targets = arcs.into_iter().map(|(_, v)| v).collect();
        Ok(Self { offsets, targets })
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.targets.len() / 2
    }

    /// Number of stored directed arcs (twice the edge count).
    pub fn num_arcs(&self) -> usize {
        self.targets.len()
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.num_nodes()).map(|v| self.degree(v)).collect()
    }

    /// Position of `v`'s first arc in the flat arc array.
    pub fn arc_offset(&self, v: NodeId) -> usize {
        self.offsets[v]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in CSR order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.num_nodes()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Every directed arc `(u, v)` in CSR order.
    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.num_nodes()).flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u, v)))
    }

    pub fn check_node(&self, node: NodeId) -> Result<()> {
        if node < self.num_nodes() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                node,
                num_nodes: self.num_nodes(),
            })
        }
    }
}

/// `D̃^{-1/2} (A + I) D̃^{-1/2}` with `D̃ = D + I`, stored as CSR.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedAdjacency {
    offsets: Vec<usize>,
    cols: Vec<NodeId>,
    weights: Vec<f64>,
}

impl NormalizedAdjacency {
    pub fn new(g: &Graph) -> Self {
        let n = g.num_nodes();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(g.num_arcs() + n);
        let mut weights = Vec::with_capacity(g.num_arcs() + n);
        offsets.push(0);
        for i in 0..n {
            let di = g.degree(i) + 1;
            let nbrs = g.neighbors(i);
            let split = nbrs.partition_point(|&j| j < i);
            let row = nbrs[..split]
                .iter()
                .copied()
                .chain(core::iter::once(i))
                .chain(nbrs[split..].iter().copied());
            for j in row {
                let dj = g.degree(j) + 1;
                // Integer product first, so (i, j) and (j, i) are bit-identical.
                cols.push(j);
                weights.push(1.0 / math::sqrt((di * dj) as f64));
            }
            offsets.push(cols.len());
        }
        Self {
            offsets,
            cols,
            weights,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Row `i` as parallel column / weight slices.
    pub fn row(&self, i: NodeId) -> (&[NodeId], &[f64]) {
        let r = self.offsets[i]..self.offsets[i + 1];
        (&self.cols[r.clone()], &self.weights[r])
    }

    /// Entry `(i, j)`, zero when absent.
    pub fn get(&self, i: NodeId, j: NodeId) -> f64 {
        let (cols, w) = self.row(i);
        cols.binary_search(&j).map(|k| w[k]).unwrap_or(0.0)
    }

    /// Sparse-dense product `Â · m`. `Â` is symmetric, so this is also `Âᵀ · m`.
    pub fn propagate(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        if m.rows() != self.num_nodes() {
            return Err(Error::Shape {
                op: "propagate",
                expected: (self.num_nodes(), m.cols()),
                found: (m.rows(), m.cols()),
            });
        }
        let mut out = DenseMatrix::zeros(m.rows(), m.cols());
        for i in 0..self.num_nodes() {
            let (cols, w) = self.row(i);
            let dst = out.row_mut(i);
            for (&j, &wij) in cols.iter().zip(w) {
                for (d, s) in dst.iter_mut().zip(m.row(j)) {
                    *d += wij * s;
                }
            }
        }
        Ok(out)
    }
}

/// Hop distance from every node to its nearest source; [`UNREACHABLE`]
/// when no source reaches it.
pub fn multi_source_bfs(g: &Graph, sources: &[NodeId]) -> Result<Vec<u32>> {
    if sources.is_empty() {
        return Err(invalid("multi-source BFS needs at least one source"));
    }
    let mut dist = vec![UNREACHABLE; g.num_nodes()];
    let mut queue = VecDeque::with_capacity(g.num_nodes());
    for &s in sources {
        g.check_node(s)?;
        if dist[s] != 0 {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let next = dist[u] + 1;
        for &v in g.neighbors(u) {
            if dist[v] == UNREACHABLE {
                dist[v] = next;
                queue.push_back(v);
            }
        }
    }
    Ok(dist)
}

/// Labeled nodes plus the unlabeled nodes split at hop threshold `delta`.
///
/// All three node lists are sorted ascending and together cover every node
/// exactly once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistancePartition {
    pub labeled: Vec<NodeId>,
    /// Unlabeled nodes within `delta` hops of some labeled node.
    pub near: Vec<NodeId>,
    /// Unlabeled nodes farther than `delta` hops, including unreachable ones.
    pub far: Vec<NodeId>,
    pub min_dist: Vec<u32>,
    pub delta: u32,
}

impl DistancePartition {
    pub fn num_nodes(&self) -> usize {
        self.min_dist.len()
    }

    pub fn labeled_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.num_nodes()];
        for &v in &self.labeled {
            mask[v] = true;
        }
        mask
    }

    /// Counts of nodes per hop distance `0..=max finite distance`, and the
    /// number of unreachable nodes.
    pub fn distance_histogram(&self) -> (Vec<usize>, usize) {
        let max = self
            .min_dist
            .iter()
            .copied()
            .filter(|&d| d != UNREACHABLE)
            .max()
            .unwrap_or(0) as usize;
        let mut hist = vec![0usize; max + 1];
        let mut unreachable = 0;
        for &d in &self.min_dist {
            if d == UNREACHABLE {
                unreachable += 1;
            } else {
                hist[d as usize] += 1;
            }
        }
        (hist, unreachable)
    }
}

pub fn partition_unlabeled(g: &Graph, labeled: &[NodeId], delta: u32) -> Result<DistancePartition> {
    if labeled.is_empty() {
        return Err(invalid("the labeled set is empty"));
    }
    if delta < 1 {
        return Err(invalid("distance threshold delta must be at least 1"));
    }
    let min_dist = multi_source_bfs(g, labeled)?;
    let mut lab = Vec::new();
    let mut near = Vec::new();
    let mut far = Vec::new();
    for (v, &d) in min_dist.iter().enumerate() {
        match d {
            0 => lab.push(v),
            d if d <= delta => near.push(v),
            _ => far.push(v),
        }
    }
    Ok(DistancePartition {
        labeled: lab,
        near,
        far,
        min_dist,
        delta,
    })
}

/// Parameters of a two-block stochastic block model.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SbmParams {
    pub n_pos: usize,
    pub n_neg: usize,
    pub p_intra: f64,
    pub p_inter: f64,
}

impl SbmParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        if !unit(self.p_intra) || !unit(self.p_inter) {
            return Err(invalid("SBM probabilities must lie in [0, 1]"));
        }
        if self.p_inter > self.p_intra {
            return Err(invalid("SBM requires p_inter <= p_intra"));
        }
        Ok(())
    }
}

/// Two-block SBM: nodes `0..n_pos` are positive, the rest negative.
///
/// Every unordered pair gets one independent Bernoulli draw, in
/// lexicographic pair order, from a ChaCha stream keyed by `seed`.
pub fn generate_sbm(params: &SbmParams, seed: u64) -> Result<(Graph, Vec<bool>)> {
    params.validate()?;
    let n = params.n_pos + params.n_neg;
    let labels: Vec<bool> = (0..n).map(|v| v < params.n_pos).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if labels[i] == labels[j] {
                params.p_intra
            } else {
                params.p_inter
            };
            let u: f64 = rng.random();
            if u < p {
                edges.push((i, j));
            }
        }
    }
    Ok((Graph::from_edges(n, &edges)?, labels))
}

/// Bag-of-words style binary features for synthetic graphs.
///
/// The first half of the vocabulary is the positive topic, the second half
/// the negative one. A node draws each word of its own topic with
/// probability `p_topic` and every other word with probability `p_noise`.
pub fn topic_features(labels: &[bool], dim: usize, p_topic: f64, p_noise: f64, seed: u64) -> Result<DenseMatrix> {
    if dim < 2 {
        return Err(invalid("synthetic feature dimension must be at least 2"));
    }
    if !(0.0..=1.0).contains(&p_topic) || !(0.0..=1.0).contains(&p_noise) {
        return Err(invalid("feature probabilities must lie in [0, 1]"));
    }
    let half = dim / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DenseMatrix::zeros(labels.len(), dim);
    for (v, &pos) in labels.iter().enumerate() {
        for (d, cell) in x.row_mut(v).iter_mut().enumerate() {
            let own = (d < half) == pos;
            let p = if own { p_topic } else { p_noise };
            let u: f64 = rng.random();
            if u < p {
                *cell = 1.0;
            }
        }
    }
    Ok(x)
}
