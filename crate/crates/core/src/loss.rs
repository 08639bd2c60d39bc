//! PU losses over node scores and the structural regularizer over node
//! representations. Every function returns the loss value together with
//! its exact gradient; `|·|` and `max(0, ·)` use subgradient 0 at the kink.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{config, invalid, Result};
use crate::graph::{DistancePartition, Graph};
use crate::math::{abs_subgradient, ln, sigmoid_with_grad};
use crate::sampler::NegativeSet;
use crate::tensor::{dot, DenseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LossKind {
    /// Binary cross-entropy treating every unlabeled node as negative.
    Naive,
    /// Non-negative PU risk with the sigmoid surrogate.
    Nnpu,
    /// Label-distribution matching against a single class prior.
    Distpu,
    /// Label-distribution matching with separate priors for unlabeled nodes
    /// near to and far from the labeled set.
    DistanceAware,
}

/// How the regularizer's per-arc terms are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RegScale {
    /// Sum over directed arcs.
    #[default]
    Sum,
    /// Sum divided by the number of directed arcs.
    MeanPerArc,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Naive => "naive",
            LossKind::Nnpu => "nnpu",
            LossKind::Distpu => "distpu",
            LossKind::DistanceAware => "distance_aware",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct LossConfig {
    pub kind: LossKind,
    /// Class prior for `nnpu` and `distpu`; `None` means the positive
    /// fraction of the dataset.
    pub pi_p: Option<f64>,
    pub pi_hat: f64,
    pub pi_breve: f64,
    pub delta: u32,
    pub alpha: f64,
    pub k: usize,
    pub reg_scale: RegScale,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            kind: LossKind::DistanceAware,
            pi_p: None,
            pi_hat: 0.6,
            pi_breve: 0.3,
            delta: 3,
            alpha: 0.01,
            k: 50,
            reg_scale: RegScale::Sum,
        }
    }
}

fn open_unit(p: f64) -> bool {
    p > 0.0 && p < 1.0
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.pi_p {
            if !open_unit(p) {
                return Err(config("pi_p must lie in (0, 1)"));
            }
        }
        if !open_unit(self.pi_hat) || !open_unit(self.pi_breve) {
            return Err(config("pi_hat and pi_breve must lie in (0, 1)"));
        }
        if self.kind == LossKind::DistanceAware && self.pi_hat <= self.pi_breve {
            return Err(config("distance-aware loss needs pi_hat > pi_breve"));
        }
        if self.delta < 1 {
            return Err(config("delta must be at least 1"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(config("alpha must be finite and non-negative"));
        }
        if self.alpha > 0.0 && self.k < 1 {
            return Err(config("K must be at least 1 when alpha > 0"));
        }
        Ok(())
    }

    fn prior(&self) -> Result<f64> {
        self.pi_p
            .ok_or_else(|| config("pi_p is unresolved; set it or let the trainer derive it"))
    }
}

/// A loss value with its named components.
///
/// `total` is the sum of all parts except `"regularizer"`, plus `alpha`
/// times the regularizer part when present.
#[derive(Clone, Debug, PartialEq)]
pub struct LossValue {
    pub total: f64,
    pub parts: Vec<(&'static str, f64)>,
}

impl LossValue {
    fn from_parts(parts: Vec<(&'static str, f64)>) -> Self {
        let total = parts.iter().map(|(_, v)| v).sum();
        Self { total, parts }
    }

    pub fn part(&self, name: &str) -> Option<f64> {
        self.parts.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

fn check_scores(y_hat: &[f64], labeled: &[bool]) -> Result<()> {
    if y_hat.len() != labeled.len() {
        return Err(invalid("score vector and labeled mask differ in length"));
    }
    if y_hat.iter().any(|y| !(*y > 0.0 && *y < 1.0)) {
        return Err(invalid("scores must lie in (0, 1)"));
    }
    Ok(())
}

/// Sum and count of the scores selected by `keep`, in ascending node order.
fn masked_sum(y_hat: &[f64], mask: &[bool], keep: bool) -> (f64, usize) {
    let mut sum = 0.0;
    let mut n = 0;
    for (y, &m) in y_hat.iter().zip(mask) {
        if m == keep {
            sum += y;
            n += 1;
        }
    }
    (sum, n)
}

fn indexed_mean(y_hat: &[f64], nodes: &[usize]) -> f64 {
    let mut sum = 0.0;
    for &v in nodes {
        sum += y_hat[v];
    }
    sum / nodes.len() as f64
}

pub fn naive_loss(y_hat: &[f64], labeled: &[bool]) -> Result<(LossValue, Vec<f64>)> {
    check_scores(y_hat, labeled)?;
    if !labeled.iter().any(|&l| l) {
        return Err(invalid("the labeled set is empty"));
    }
    let n = y_hat.len() as f64;
    let mut pos = 0.0;
    let mut neg = 0.0;
    let mut grad = vec![0.0; y_hat.len()];
    for ((g, &y), &l) in grad.iter_mut().zip(y_hat).zip(labeled) {
        if l {
            pos -= ln(y);
            *g = -1.0 / (n * y);
        } else {
            neg -= ln(1.0 - y);
            *g = 1.0 / (n * (1.0 - y));
        }
    }
    Ok((
        LossValue::from_parts(vec![("supervised", pos / n), ("unlabeled", neg / n)]),
        grad,
    ))
}

pub fn nnpu_loss(y_hat: &[f64], labeled: &[bool], pi_p: f64) -> Result<(LossValue, Vec<f64>)> {
    check_scores(y_hat, labeled)?;
    let (sum_l, n_l) = masked_sum(y_hat, labeled, true);
    let (sum_u, n_u) = masked_sum(y_hat, labeled, false);
    if n_l == 0 || n_u == 0 {
        return Err(invalid("nnPU needs non-empty labeled and unlabeled sets"));
    }
    let (n_l, n_u) = (n_l as f64, n_u as f64);
    // Sigmoid surrogate on the logit: ℓ(s, +1) = 1 - ŷ, ℓ(s, -1) = ŷ.
    let risk_pos_plus = 1.0 - sum_l / n_l;
    let risk_pos_minus = sum_l / n_l;
    let risk_unl_minus = sum_u / n_u;
    let correction = risk_unl_minus - pi_p * risk_pos_minus;
    let active = correction > 0.0;

    let grad = labeled
        .iter()
        .map(|&l| match (l, active) {
            (true, true) => -2.0 * pi_p / n_l,
            (true, false) => -pi_p / n_l,
            (false, true) => 1.0 / n_u,
            (false, false) => 0.0,
        })
        .collect();
    Ok((
        LossValue::from_parts(vec![
            ("positive_risk", pi_p * risk_pos_plus),
            ("negative_risk", if active { correction } else { 0.0 }),
        ]),
        grad,
    ))
}

pub fn distpu_loss(y_hat: &[f64], labeled: &[bool], pi_p: f64) -> Result<(LossValue, Vec<f64>)> {
    check_scores(y_hat, labeled)?;
    let (sum_l, n_l) = masked_sum(y_hat, labeled, true);
    let (sum_u, n_u) = masked_sum(y_hat, labeled, false);
    if n_l == 0 || n_u == 0 {
        return Err(invalid("Dist-PU needs non-empty labeled and unlabeled sets"));
    }
    let mean_l = sum_l / n_l as f64;
    let mean_u = sum_u / n_u as f64;
    let coef = 2.0 * pi_p;
    let g_l = coef * abs_subgradient(mean_l - 1.0) / n_l as f64;
    let g_u = abs_subgradient(mean_u - pi_p) / n_u as f64;
    let grad = labeled.iter().map(|&l| if l { g_l } else { g_u }).collect();
    Ok((
        LossValue::from_parts(vec![
            ("supervised", coef * (mean_l - 1.0).abs()),
            ("unlabeled", (mean_u - pi_p).abs()),
        ]),
        grad,
    ))
}

/// Distance-aware PU loss over the partition's labeled, near and far sets.
///
/// An empty unlabeled subset drops its term, and the supervised
/// coefficient becomes twice the prior of the surviving subset. With an
/// empty far set and `pi_hat = π_P` the value is exactly [`distpu_loss`].
pub fn distance_aware_loss(
    y_hat: &[f64],
    partition: &DistancePartition,
    pi_hat: f64,
    pi_breve: f64,
) -> Result<(LossValue, Vec<f64>)> {
    if y_hat.len() != partition.num_nodes() {
        return Err(invalid("score vector and partition differ in length"));
    }
    if y_hat.iter().any(|y| !(*y > 0.0 && *y < 1.0)) {
        return Err(invalid("scores must lie in (0, 1)"));
    }
    let lab = &partition.labeled;
    let near = &partition.near;
    let far = &partition.far;
    if lab.is_empty() {
        return Err(invalid("the labeled set is empty"));
    }
    let coef = match (near.is_empty(), far.is_empty()) {
        (false, false) => 2.0 * (pi_hat + pi_breve),
        (false, true) => 2.0 * pi_hat,
        (true, false) => 2.0 * pi_breve,
        (true, true) => return Err(invalid("both unlabeled subsets are empty")),
    };

    let mut grad = vec![0.0; y_hat.len()];
    let mut parts = Vec::with_capacity(3);

    let mean_l = indexed_mean(y_hat, lab);
    let g = coef * abs_subgradient(mean_l - 1.0) / lab.len() as f64;
    for &v in lab {
        grad[v] = g;
    }
    parts.push(("supervised", coef * (mean_l - 1.0).abs()));

    for (name, nodes, prior) in [("near", near, pi_hat), ("far", far, pi_breve)] {
        if nodes.is_empty() {
            continue;
        }
        let mean = indexed_mean(y_hat, nodes);
        let g = abs_subgradient(mean - prior) / nodes.len() as f64;
        for &v in nodes.iter() {
            grad[v] = g;
        }
        parts.push((name, (mean - prior).abs()));
    }
    Ok((LossValue::from_parts(parts), grad))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularizerValue {
    pub value: f64,
    pub d_z: DenseMatrix,
    /// Nodes whose negative term was skipped (no non-neighbors).
    pub skipped: usize,
}

/// Structural regularizer
/// `Σ_i Σ_{j ∈ N(i)} [ (S_ij - 1)² + Σ_k S_{i,v_k}² ]` with `S = σ(z_i·z_j)`.
///
/// Each undirected edge contributes once from each endpoint. The negative
/// nodes `v_k` are taken from `negatives`, which fixes K draws per arc.
pub fn structural_regularizer(z: &DenseMatrix, graph: &Graph, negatives: &NegativeSet) -> Result<RegularizerValue> {
    if z.rows() != graph.num_nodes() {
        return Err(invalid("representation rows differ from node count"));
    }
    if graph.num_edges() == 0 {
        return Err(invalid("structural regularizer needs at least one edge"));
    }
    if negatives.as_slice().len() != graph.num_arcs() * negatives.k() {
        return Err(invalid("negative draws do not match the graph"));
    }
    let mut d_z = DenseMatrix::zeros(z.rows(), z.cols());
    let mut value = 0.0;
    let mut pair = |i: usize, j: usize, target: f64, d_z: &mut DenseMatrix| {
        let s_dot = dot(z.row(i), z.row(j));
        let (s, ds) = sigmoid_with_grad(s_dot);
        let r = s - target;
        value += r * r;
        let c = 2.0 * r * ds;
        if c == 0.0 {
            return;
        }
        let (zi, zj) = (z.row(i), z.row(j));
        for t in 0..zi.len() {
            let (a, b) = (zi[t], zj[t]);
            d_z[(i, t)] += c * b;
            d_z[(j, t)] += c * a;
        }
    };
    for i in 0..graph.num_nodes() {
        let base = graph.arc_offset(i);
        for (a, &j) in graph.neighbors(i).iter().enumerate() {
            pair(i, j, 1.0, &mut d_z);
            if negatives.is_skipped(i) {
                continue;
            }
            for &k in negatives.for_arc(base + a) {
                pair(i, k, 0.0, &mut d_z);
            }
        }
    }
    Ok(RegularizerValue {
        value,
        d_z,
        skipped: negatives.skipped_count(),
    })
}

/// Loss value plus gradients with respect to the scores and representations.
#[derive(Clone, Debug, PartialEq)]
pub struct Objective {
    pub value: LossValue,
    pub d_y_hat: Vec<f64>,
    pub d_z: Option<DenseMatrix>,
    pub skipped_negatives: usize,
}

/// Selected PU loss plus `alpha` times the structural regularizer.
///
/// The regularizer is evaluated only when `alpha > 0`, in which case
/// `negatives` must be provided.
pub fn combined_objective(
    y_hat: &[f64],
    z: &DenseMatrix,
    partition: &DistancePartition,
    graph: &Graph,
    cfg: &LossConfig,
    negatives: Option<&NegativeSet>,
) -> Result<Objective> {
    cfg.validate()?;
    let (mut value, d_y_hat) = match cfg.kind {
        LossKind::DistanceAware => distance_aware_loss(y_hat, partition, cfg.pi_hat, cfg.pi_breve)?,
        kind => {
            let labeled = partition.labeled_mask();
            match kind {
                LossKind::Naive => naive_loss(y_hat, &labeled)?,
                LossKind::Nnpu => nnpu_loss(y_hat, &labeled, cfg.prior()?)?,
                _ => distpu_loss(y_hat, &labeled, cfg.prior()?)?,
            }
        }
    };
    let mut d_z = None;
    let mut skipped_negatives = 0;
    if cfg.alpha > 0.0 {
        let negatives = negatives.ok_or_else(|| config("alpha > 0 requires negative samples"))?;
        let reg = structural_regularizer(z, graph, negatives)?;
        let scale = match cfg.reg_scale {
            RegScale::Sum => 1.0,
            RegScale::MeanPerArc => 1.0 / graph.num_arcs() as f64,
        };
        let r = reg.value * scale;
        value.total += cfg.alpha * r;
        value.parts.push(("regularizer", r));
        let mut g = reg.d_z;
        let w = cfg.alpha * scale;
        for x in g.as_mut_slice() {
            *x *= w;
        }
        d_z = Some(g);
        skipped_negatives = reg.skipped;
    }
    Ok(Objective {
        value,
        d_y_hat,
        d_z,
        skipped_negatives,
    })
}
