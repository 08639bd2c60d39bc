//! Independent oracles shared by the integration and acceptance suites.
//!
//! Nothing here calls the code path it checks: gradients are checked
//! against central finite differences of the forward value, BFS against
//! Floyd-Warshall, and F1 against precision/recall in exact rationals.
#![allow(dead_code)]

use pugnn_core::dataset::{make_pu_split, make_train_split, normalize_features, PUDataset};
use pugnn_core::gcn::{gcn_forward, init_params, ParamStore};
use pugnn_core::graph::{generate_sbm, partition_unlabeled, topic_features, SbmParams, DistancePartition, Graph, NormalizedAdjacency, UNREACHABLE};
use pugnn_core::loss::{combined_objective, LossConfig, LossKind, RegScale};
use pugnn_core::sampler::{NegativeSampler, NegativeSet};
use pugnn_core::tensor::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-5;
pub const FD_REL_TOL: f64 = 1e-4;
pub const FD_ABS_FLOOR: f64 = 1e-8;
/// Instances with a kink argument closer than this are redrawn. It must
/// exceed the finite-difference step, otherwise a perturbation can cross.
pub const KINK_MARGIN: f64 = 1e-4;

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// All-pairs hop distances by Floyd-Warshall, minimized over `sources`.
pub fn floyd_warshall_min(g: &Graph, sources: &[usize]) -> Vec<u32> {
    let n = g.num_nodes();
    let inf = u64::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for &j in g.neighbors(i) {
            d[i][j] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    (0..n)
        .map(|v| {
            let m = sources.iter().map(|&s| d[s][v]).min().unwrap();
            if m >= inf {
                UNREACHABLE
            } else {
                m as u32
            }
        })
        .collect()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Harmonic mean of precision and recall as a reduced fraction, 0/1 when
/// undefined. Precision and recall are themselves kept as fractions.
fn f1_fraction(tp: u64, fp: u64, fn_: u64) -> (u64, u64) {
    let (p_num, p_den) = (tp, tp + fp);
    let (r_num, r_den) = (tp, tp + fn_);
    if p_den == 0 || r_den == 0 || tp == 0 {
        return (0, 1);
    }
    // 2PR / (P + R) with P = a/b, R = c/d  =>  2ac / (ad + cb)
    let num = 2 * p_num * r_num;
    let den = p_num * r_den + r_num * p_den;
    let g = gcd(num, den);
    (num / g, den / g)
}

pub struct BruteF1 {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub f1_pos: f64,
    pub f1_neg: f64,
    pub macro_f1: f64,
}

pub fn brute_force_f1(y_hat: &[f64], truth: &[bool], mask: &[bool]) -> BruteF1 {
    let mut c = [[0usize; 2]; 2]; // [truth][pred]
    for i in 0..y_hat.len() {
        if mask[i] {
            let pred = !(y_hat[i] < 0.5);
            c[truth[i] as usize][pred as usize] += 1;
        }
    }
    let (tp, fn_, fp, tn) = (c[1][1], c[1][0], c[0][1], c[0][0]);
    let pct = |(num, den): (u64, u64)| 100.0 * (num as f64 / den as f64);
    let f1_pos = pct(f1_fraction(tp as u64, fp as u64, fn_ as u64));
    let f1_neg = pct(f1_fraction(tn as u64, fn_ as u64, fp as u64));
    BruteF1 {
        tp,
        fp,
        tn,
        fn_,
        f1_pos,
        f1_neg,
        macro_f1: (f1_pos + f1_neg) / 2.0,
    }
}

/// A small random problem for gradient checks.
pub struct GradInstance {
    pub graph: Graph,
    pub adj: NormalizedAdjacency,
    pub features: DenseMatrix,
    pub partition: DistancePartition,
    pub params: ParamStore,
    pub cfg: LossConfig,
    pub negatives: Option<NegativeSet>,
}

impl GradInstance {
    pub fn objective(&self, params: &ParamStore) -> f64 {
        let cache = gcn_forward(&self.adj, &self.features, params).unwrap();
        combined_objective(
            &cache.y_hat,
            &cache.z,
            &self.partition,
            &self.graph,
            &self.cfg,
            self.negatives.as_ref(),
        )
        .unwrap()
        .value
        .total
    }

    /// Distance of every kink argument (ReLU inputs, |·| arguments, the
    /// nnPU clamp) from its kink.
    pub fn min_kink_distance(&self) -> f64 {
        let cache = gcn_forward(&self.adj, &self.features, &self.params).unwrap();
        let mut m = cache
            .pre1
            .as_slice()
            .iter()
            .map(|x| x.abs())
            .fold(f64::INFINITY, f64::min);
        let y = &cache.y_hat;
        let mean = |nodes: &[usize]| nodes.iter().map(|&v| y[v]).sum::<f64>() / nodes.len() as f64;
        let p = &self.partition;
        let mut unl: Vec<usize> = p.near.iter().chain(&p.far).copied().collect();
        unl.sort_unstable();
        let pi = self.cfg.pi_p.unwrap_or(0.5);
        let ml = mean(&p.labeled);
        match self.cfg.kind {
            LossKind::Naive => {}
            LossKind::Nnpu => m = m.min((mean(&unl) - pi * ml).abs()),
            LossKind::Distpu => m = m.min((ml - 1.0).abs()).min((mean(&unl) - pi).abs()),
            LossKind::DistanceAware => {
                m = m.min((ml - 1.0).abs());
                if !p.near.is_empty() {
                    m = m.min((mean(&p.near) - self.cfg.pi_hat).abs());
                }
                if !p.far.is_empty() {
                    m = m.min((mean(&p.far) - self.cfg.pi_breve).abs());
                }
            }
        }
        m
    }
}

/// Draws a random instance for `kind`; `None` when it lands near a kink.
pub fn random_instance(rng: &mut ChaCha8Rng, kind: LossKind) -> Option<GradInstance> {
    let n = rng.random_range(4..=10);
    let density = rng.random_range(0.2..0.6);
    let graph = random_graph(rng, n, density);
    if graph.num_edges() == 0 {
        return None;
    }
    let dim = rng.random_range(1..=8);
    let mut features = DenseMatrix::zeros(n, dim);
    for x in features.as_mut_slice() {
        *x = rng.random_range(-1.0..1.0);
    }
    let n_lab = rng.random_range(1..n);
    let mut nodes: Vec<usize> = (0..n).collect();
    for i in 0..n_lab {
        let j = rng.random_range(i..n);
        nodes.swap(i, j);
    }
    let partition = partition_unlabeled(&graph, &nodes[..n_lab], rng.random_range(1..=3)).unwrap();

    let mut params = init_params(dim, rng.random()).unwrap();
    for (_, p) in params.iter_mut() {
        for x in p.value.as_mut_slice() {
            *x += rng.random_range(-0.3..0.3);
        }
    }
    let alpha = if rng.random::<bool>() { rng.random_range(0.01..1.0) } else { 0.0 };
    let pi_breve = rng.random_range(0.05..0.45);
    let cfg = LossConfig {
        kind,
        pi_p: Some(rng.random_range(0.1..0.9)),
        pi_hat: rng.random_range(pi_breve + 0.05..0.95),
        pi_breve,
        delta: partition.delta,
        alpha,
        k: rng.random_range(1..=3),
        reg_scale: if rng.random::<bool>() { RegScale::Sum } else { RegScale::MeanPerArc },
    };
    let negatives = (alpha > 0.0).then(|| {
        let mut sampler = NegativeSampler::new(&graph, rng.random());
        NegativeSet::sample(&mut sampler, &graph, cfg.k).unwrap()
    });
    let adj = NormalizedAdjacency::new(&graph);
    let inst = GradInstance {
        graph,
        adj,
        features,
        partition,
        params,
        cfg,
        negatives,
    };
    (inst.min_kink_distance() > KINK_MARGIN).then_some(inst)
}

pub fn fd_agrees(analytic: f64, numeric: f64) -> bool {
    (analytic - numeric).abs() <= FD_REL_TOL * analytic.abs().max(numeric.abs()) + FD_ABS_FLOOR
}

fn scalar_mut(s: &mut ParamStore, idx: usize, k: usize) -> &mut f64 {
    &mut s.iter_mut().nth(idx).unwrap().1.value.as_mut_slice()[k]
}

/// Central finite difference of `f` along every scalar of `params`,
/// returned in `ParamStore::iter` order.
pub fn numeric_param_gradient(params: &ParamStore, f: impl Fn(&ParamStore) -> f64) -> Vec<Vec<f64>> {
    let mut probe = params.clone();
    let mut out = Vec::new();
    for idx in 0..ParamStore::NAMES.len() {
        let len = params.iter().nth(idx).unwrap().1.value.as_slice().len();
        let mut g = Vec::with_capacity(len);
        for k in 0..len {
            let orig = params.iter().nth(idx).unwrap().1.value.as_slice()[k];
            *scalar_mut(&mut probe, idx, k) = orig + FD_STEP;
            let up = f(&probe);
            *scalar_mut(&mut probe, idx, k) = orig - FD_STEP;
            let down = f(&probe);
            *scalar_mut(&mut probe, idx, k) = orig;
            g.push((up - down) / (2.0 * FD_STEP));
        }
        out.push(g);
    }
    out
}

/// Central finite difference of a scalar function of a vector.
pub fn numeric_vec_gradient(x: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + FD_STEP;
            let up = f(&probe);
            probe[i] = x[i] - FD_STEP;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const SBM: SbmParams = SbmParams {
    n_pos: 200,
    n_neg: 200,
    p_intra: 0.05,
    p_inter: 0.005,
};
pub const SBM_FEATURE_DIM: usize = 32;
pub const SBM_P_TOPIC: f64 = 0.3;
pub const SBM_P_NOISE: f64 = 0.05;

/// Seeded two-block SBM with noisy topic features, half the nodes in the
/// training split and `n_labeled` labeled positives.
pub fn sbm_dataset(seed: u64, n_labeled: usize, delta: u32) -> PUDataset {
    let (graph, labels) = generate_sbm(&SBM, seed).unwrap();
    let mut x = topic_features(&labels, SBM_FEATURE_DIM, SBM_P_TOPIC, SBM_P_NOISE, seed.wrapping_add(1)).unwrap();
    normalize_features(&mut x).unwrap();
    let n = graph.num_nodes();
    let train = make_train_split(n, n / 2, seed.wrapping_add(2));
    let labeled = make_pu_split(&labels, &train, n_labeled as f64 / n as f64, seed.wrapping_add(3)).unwrap();
    PUDataset::new(graph, x, labels, train, labeled, delta).unwrap()
}
