//! Two-layer GCN backbone with a scalar sigmoid head.
//!
//! ```text
//! H1 = ReLU(Â X W1 + b1)
//! Z  = Â H1 W2 + b2
//! ŷ  = σ(Z w_head + b_head)
//! ```
//!
//! `Z` is the node representation consumed by the structural regularizer,
//! `ŷ` the score consumed by the PU losses. [`gcn_backward`] accepts
//! upstream gradients for both and accumulates exact parameter gradients.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{config, Error, Result};
use crate::graph::NormalizedAdjacency;
use crate::math;
use crate::tensor::{dot, DenseMatrix};

pub const HIDDEN_DIM: usize = 16;

/// A parameter tensor and its gradient buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub value: DenseMatrix,
    pub grad: DenseMatrix,
}

impl Param {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(DenseMatrix::zeros(rows, cols))
    }

    pub fn new(value: DenseMatrix) -> Self {
        let grad = DenseMatrix::zeros(value.rows(), value.cols());
        Self { value, grad }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamStore {
    pub w1: Param,
    pub b1: Param,
    pub w2: Param,
    pub b2: Param,
    pub w_head: Param,
    pub b_head: Param,
}

impl ParamStore {
    pub const NAMES: [&'static str; 6] = ["W1", "b1", "W2", "b2", "w_head", "b_head"];

    pub fn zeros(feature_dim: usize) -> Self {
        Self {
            w1: Param::zeros(feature_dim, HIDDEN_DIM),
            b1: Param::zeros(1, HIDDEN_DIM),
            w2: Param::zeros(HIDDEN_DIM, HIDDEN_DIM),
            b2: Param::zeros(1, HIDDEN_DIM),
            w_head: Param::zeros(HIDDEN_DIM, 1),
            b_head: Param::zeros(1, 1),
        }
    }

    /// Rebuilds a store from named values, e.g. a decoded checkpoint.
    pub fn from_named(values: Vec<(&str, DenseMatrix)>) -> Result<Self> {
        let mut slots: [Option<DenseMatrix>; 6] = Default::default();
        for (name, value) in values {
            let idx = Self::NAMES
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| config(alloc::format!("unknown parameter {name}")))?;
            slots[idx] = Some(value);
        }
        let mut it = slots.into_iter().zip(Self::NAMES);
        let mut next = || {
            let (slot, name) = it.next().unwrap();
            slot.map(Param::new)
                .ok_or_else(|| config(alloc::format!("missing parameter {name}")))
        };
        let store = Self {
            w1: next()?,
            b1: next()?,
            w2: next()?,
            b2: next()?,
            w_head: next()?,
            b_head: next()?,
        };
        store.check_shapes()?;
        Ok(store)
    }

    pub fn feature_dim(&self) -> usize {
        self.w1.value.rows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.value.cols()
    }

    fn check_shapes(&self) -> Result<()> {
        let h = self.hidden_dim();
        let want = [
            (self.feature_dim(), h),
            (1, h),
            (h, h),
            (1, h),
            (h, 1),
            (1, 1),
        ];
        for ((name, p), shape) in self.iter().zip(want) {
            if p.value.shape() != shape {
                return Err(config(alloc::format!(
                    "parameter {name} has shape {:?}, expected {shape:?}",
                    p.value.shape()
                )));
            }
        }
        Ok(())
    }

    /// Parameters in canonical order, paired with their names.
    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &Param)> {
        Self::NAMES.into_iter().zip([
            &self.w1,
            &self.b1,
            &self.w2,
            &self.b2,
            &self.w_head,
            &self.b_head,
        ])
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&'static str, &mut Param)> {
        Self::NAMES.into_iter().zip([
            &mut self.w1,
            &mut self.b1,
            &mut self.w2,
            &mut self.b2,
            &mut self.w_head,
            &mut self.b_head,
        ])
    }

    /// Whether the named parameter is a weight (decayed) rather than a bias.
    pub fn is_weight(name: &str) -> bool {
        matches!(name, "W1" | "W2" | "w_head")
    }

    pub fn zero_grad(&mut self) {
        for (_, p) in self.iter_mut() {
            p.grad.fill(0.0);
        }
    }

    pub fn grad_norm(&self) -> f64 {
        math::sqrt(self.iter().map(|(_, p)| p.grad.sum_squares()).sum())
    }

    pub fn num_scalars(&self) -> usize {
        self.iter().map(|(_, p)| p.value.as_slice().len()).sum()
    }
}

/// Glorot-uniform weights, zero biases. Deterministic in `seed`.
pub fn init_params(feature_dim: usize, seed: u64) -> Result<ParamStore> {
    init_params_from_rng(feature_dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn init_params_from_rng(feature_dim: usize, rng: &mut impl Rng) -> Result<ParamStore> {
    if feature_dim == 0 {
        return Err(config("feature dimension must be at least 1"));
    }
    let mut store = ParamStore::zeros(feature_dim);
    for (name, p) in store.iter_mut() {
        if !ParamStore::is_weight(name) {
            continue;
        }
        let (fan_in, fan_out) = p.value.shape();
        let bound = math::sqrt(6.0 / (fan_in + fan_out) as f64);
        for w in p.value.as_mut_slice() {
            *w = rng.random_range(-bound..bound);
        }
    }
    Ok(store)
}

/// Intermediate activations of one forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardCache {
    /// Layer-1 pre-activation `Â X W1 + b1`.
    pub pre1: DenseMatrix,
    /// `ReLU(pre1)`
    pub h1: DenseMatrix,
    /// `Â H1`, the input of the second weight product.
    pub agg1: DenseMatrix,
    /// Layer-2 output, the node representations.
    pub z: DenseMatrix,
    pub logits: Vec<f64>,
    /// Scores in the open interval (0, 1).
    pub y_hat: Vec<f64>,
}

fn check_inputs(adj: &NormalizedAdjacency, features: &DenseMatrix, params: &ParamStore) -> Result<()> {
    if features.rows() != adj.num_nodes() {
        return Err(Error::Shape {
            op: "gcn features",
            expected: (adj.num_nodes(), features.cols()),
            found: features.shape(),
        });
    }
    if params.feature_dim() != features.cols() {
        return Err(Error::Shape {
            op: "gcn W1",
            expected: (features.cols(), params.hidden_dim()),
            found: params.w1.value.shape(),
        });
    }
    Ok(())
}

fn finite(m: &DenseMatrix, layer: &'static str) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(layer))
    }
}

pub fn gcn_forward(adj: &NormalizedAdjacency, features: &DenseMatrix, params: &ParamStore) -> Result<ForwardCache> {
    check_inputs(adj, features, params)?;

    let xw = features.matmul(&params.w1.value)?;
    let mut pre1 = adj.propagate(&xw)?;
    pre1.add_row_broadcast(&params.b1.value)?;
    finite(&pre1, "layer1")?;
    let mut h1 = pre1.clone();
    for x in h1.as_mut_slice() {
        if *x <= 0.0 {
            *x = 0.0;
        }
    }

    let agg1 = adj.propagate(&h1)?;
    let mut z = agg1.matmul(&params.w2.value)?;
    z.add_row_broadcast(&params.b2.value)?;
    finite(&z, "layer2")?;

    let head = params.w_head.value.as_slice();
    let bias = params.b_head.value[(0, 0)];
    let logits: Vec<f64> = (0..z.rows()).map(|i| dot(z.row(i), head) + bias).collect();
    if logits.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("head"));
    }
    let y_hat = logits.iter().map(|&s| math::open_unit_sigmoid(s)).collect();

    Ok(ForwardCache {
        pre1,
        h1,
        agg1,
        z,
        logits,
        y_hat,
    })
}

/// Accumulates `∂L/∂θ` into the gradient buffers of `params`, given
/// `∂L/∂ŷ` and optionally `∂L/∂Z` from the representation-level terms.
pub fn gcn_backward(
    adj: &NormalizedAdjacency,
    features: &DenseMatrix,
    cache: &ForwardCache,
    d_y_hat: &[f64],
    d_z: Option<&DenseMatrix>,
    params: &mut ParamStore,
) -> Result<()> {
    check_inputs(adj, features, params)?;
    let n = adj.num_nodes();
    let h = params.hidden_dim();
    if cache.z.shape() != (n, h) || cache.logits.len() != n {
        return Err(Error::Shape {
            op: "gcn_backward cache",
            expected: (n, h),
            found: cache.z.shape(),
        });
    }
    if d_y_hat.len() != n {
        return Err(Error::Shape {
            op: "gcn_backward dL/dy",
            expected: (n, 1),
            found: (d_y_hat.len(), 1),
        });
    }

    // head
    let d_logit: Vec<f64> = d_y_hat
        .iter()
        .zip(&cache.logits)
        .map(|(g, &s)| g * math::sigmoid_grad(s))
        .collect();
    let mut dz = match d_z {
        Some(m) => {
            if m.shape() != (n, h) {
                return Err(Error::Shape {
                    op: "gcn_backward dL/dZ",
                    expected: (n, h),
                    found: m.shape(),
                });
            }
            m.clone()
        }
        None => DenseMatrix::zeros(n, h),
    };
    {
        let w_head = params.w_head.value.as_slice();
        let gw = params.w_head.grad.as_mut_slice();
        let mut gb = 0.0;
        for (i, &g) in d_logit.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            for ((acc, zi), (dzi, w)) in gw.iter_mut().zip(cache.z.row(i)).zip(dz.row_mut(i).iter_mut().zip(w_head)) {
                *acc += g * zi;
                *dzi += g * w;
            }
            gb += g;
        }
        params.b_head.grad[(0, 0)] += gb;
    }

    // layer 2
    params.w2.grad.add_assign(&cache.agg1.t_matmul(&dz)?)?;
    params.b2.grad.add_assign(&dz.column_sums())?;
    let d_agg1 = dz.matmul_t(&params.w2.value)?;
    let mut d_pre1 = adj.propagate(&d_agg1)?;

    // ReLU, subgradient 0 at 0
    for (g, &p) in d_pre1.as_mut_slice().iter_mut().zip(cache.pre1.as_slice()) {
        if p <= 0.0 {
            *g = 0.0;
        }
    }

    // layer 1
    params.b1.grad.add_assign(&d_pre1.column_sums())?;
    let d_xw = adj.propagate(&d_pre1)?;
    params.w1.grad.add_assign(&features.t_matmul(&d_xw)?)?;

    for (name, p) in params.iter() {
        if !p.grad.is_finite() {
            return Err(Error::NonFinite(name));
        }
    }
    Ok(())
}

/// `σ(z_i · z_j)`
pub fn pairwise_similarity(z: &DenseMatrix, i: usize, j: usize) -> f64 {
    math::sigmoid(dot(z.row(i), z.row(j)))
}
