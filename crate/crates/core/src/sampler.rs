//! Uniform non-neighbor sampling for the structural regularizer.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, NodeId};

/// Seeded sampler over the non-neighbors of a query node.
///
/// Draws are uniform over `V \ ({v} ∪ N(v))`, obtained by rejection from
/// the uniform distribution over all nodes. The sequence of draws is a
/// function of the seed and the query sequence only.
#[derive(Clone, Debug)]
pub struct NegativeSampler {
    rng: ChaCha8Rng,
    non_neighbors: Vec<usize>,
}

impl NegativeSampler {
    pub fn new(g: &Graph, seed: u64) -> Self {
        Self::from_rng(g, ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn from_rng(g: &Graph, rng: ChaCha8Rng) -> Self {
        let n = g.num_nodes();
        let non_neighbors = (0..n).map(|v| n - 1 - g.degree(v)).collect();
        Self { rng, non_neighbors }
    }

    pub fn non_neighbor_count(&self, v: NodeId) -> usize {
        self.non_neighbors[v]
    }

    /// Draws `k` non-neighbors of `node`, with replacement.
    pub fn sample_negatives(&mut self, g: &Graph, node: NodeId, k: usize) -> Result<Vec<NodeId>> {
        let mut out = Vec::with_capacity(k);
        self.sample_into(g, node, k, &mut out)?;
        Ok(out)
    }

    fn sample_into(&mut self, g: &Graph, node: NodeId, k: usize, out: &mut Vec<NodeId>) -> Result<()> {
        g.check_node(node)?;
        if self.non_neighbors[node] == 0 {
            return Err(Error::NoNonNeighbors(node));
        }
        let n = g.num_nodes();
        for _ in 0..k {
            loop {
                let c = self.rng.random_range(0..n);
                if c != node && !g.has_edge(node, c) {
                    out.push(c);
                    break;
                }
            }
        }
        Ok(())
    }
}

/// Frozen negative draws: `k` nodes for every directed arc of a graph.
///
/// Arcs follow the graph's CSR order. Arcs leaving a node without
/// non-neighbors carry no draws and are flagged as skipped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NegativeSet {
    k: usize,
    draws: Vec<NodeId>,
    skipped: Vec<bool>,
}

impl NegativeSet {
    /// Fresh draws for every arc, in CSR order.
    pub fn sample(sampler: &mut NegativeSampler, g: &Graph, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(invalid("negative sample count K must be at least 1"));
        }
        let mut draws = Vec::with_capacity(g.num_arcs() * k);
        let mut skipped = vec![false; g.num_nodes()];
        for v in 0..g.num_nodes() {
            if g.degree(v) == 0 {
                continue;
            }
            if sampler.non_neighbor_count(v) == 0 {
                skipped[v] = true;
                draws.resize(draws.len() + g.degree(v) * k, v);
                continue;
            }
            for _ in 0..g.degree(v) {
                sampler.sample_into(g, v, k, &mut draws)?;
            }
        }
        Ok(Self { k, draws, skipped })
    }

    /// Explicit draws, laid out arc-major in CSR order (`num_arcs * k`).
    pub fn from_draws(g: &Graph, k: usize, draws: Vec<NodeId>) -> Result<Self> {
        if k == 0 {
            return Err(invalid("negative sample count K must be at least 1"));
        }
        if draws.len() != g.num_arcs() * k {
            return Err(invalid(alloc::format!(
                "expected {} negative draws, got {}",
                g.num_arcs() * k,
                draws.len()
            )));
        }
        for &d in &draws {
            g.check_node(d)?;
        }
        let n = g.num_nodes();
        let skipped = (0..n).map(|v| g.degree(v) > 0 && g.degree(v) == n - 1).collect();
        Ok(Self { k, draws, skipped })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Draws attached to the arc at flat index `arc`.
    pub fn for_arc(&self, arc: usize) -> &[NodeId] {
        &self.draws[arc * self.k..(arc + 1) * self.k]
    }

    pub fn is_skipped(&self, v: NodeId) -> bool {
        self.skipped[v]
    }

    /// Nodes whose negative term was skipped for lack of non-neighbors.
    pub fn skipped_count(&self) -> usize {
        self.skipped.iter().filter(|&&s| s).count()
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.draws
    }
}
