//! Analytic gradients against central finite differences.

mod support;

use pugnn_core::gcn::{gcn_backward, gcn_forward};
use pugnn_core::graph::{partition_unlabeled, Graph};
use pugnn_core::loss::{
    combined_objective, distance_aware_loss, distpu_loss, naive_loss, nnpu_loss, structural_regularizer, LossKind,
};
use pugnn_core::sampler::{NegativeSampler, NegativeSet};
use pugnn_core::tensor::DenseMatrix;
use rand::Rng;
use support::*;

fn analytic_param_gradient(inst: &GradInstance) -> Vec<Vec<f64>> {
    let mut params = inst.params.clone();
    let cache = gcn_forward(&inst.adj, &inst.features, &params).unwrap();
    let obj = combined_objective(
        &cache.y_hat,
        &cache.z,
        &inst.partition,
        &inst.graph,
        &inst.cfg,
        inst.negatives.as_ref(),
    )
    .unwrap();
    params.zero_grad();
    gcn_backward(
        &inst.adj,
        &inst.features,
        &cache,
        &obj.d_y_hat,
        obj.d_z.as_ref(),
        &mut params,
    )
    .unwrap();
    params.iter().map(|(_, p)| p.grad.as_slice().to_vec()).collect()
}

#[test]
fn full_model_gradient_matches_finite_differences() {
    let mut rng = rng(17);
    for kind in [LossKind::Naive, LossKind::Nnpu, LossKind::Distpu, LossKind::DistanceAware] {
        let mut checked = 0;
        while checked < 15 {
            let Some(inst) = random_instance(&mut rng, kind) else { continue };
            let analytic = analytic_param_gradient(&inst);
            let numeric = numeric_param_gradient(&inst.params, |p| inst.objective(p));
            for (name, (a, n)) in pugnn_core::ParamStore::NAMES.iter().zip(analytic.iter().zip(&numeric)) {
                for (k, (&ai, &ni)) in a.iter().zip(n).enumerate() {
                    assert!(fd_agrees(ai, ni), "{kind:?} {name}[{k}]: analytic {ai} vs numeric {ni}");
                }
            }
            checked += 1;
        }
    }
}

fn random_scores(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.02..0.98)).collect()
}

#[test]
fn loss_gradients_wrt_scores() {
    let mut rng = rng(5);
    let labeled = [true, false, true, false, false, false, true];
    let mut checked = 0;
    while checked < 40 {
        let y = random_scores(&mut rng, labeled.len());
        let pi = rng.random_range(0.2..0.8);
        let ml = (y[0] + y[2] + y[6]) / 3.0;
        let mu = (y[1] + y[3] + y[4] + y[5]) / 4.0;
        if (mu - pi).abs() < KINK_MARGIN || (mu - pi * ml).abs() < KINK_MARGIN {
            continue;
        }
        type LossFn = fn(&[f64], &[bool], f64) -> (f64, Vec<f64>);
        let fns: [LossFn; 3] = [
            |y, l, _| {
                let (v, g) = naive_loss(y, l).unwrap();
                (v.total, g)
            },
            |y, l, p| {
                let (v, g) = nnpu_loss(y, l, p).unwrap();
                (v.total, g)
            },
            |y, l, p| {
                let (v, g) = distpu_loss(y, l, p).unwrap();
                (v.total, g)
            },
        ];
        for f in fns {
            let (_, g) = f(&y, &labeled, pi);
            let num = numeric_vec_gradient(&y, |yy| f(yy, &labeled, pi).0);
            for (a, n) in g.iter().zip(&num) {
                assert!(fd_agrees(*a, *n), "{a} vs {n}");
            }
        }
        checked += 1;
    }
}

#[test]
fn distance_aware_gradient_wrt_scores() {
    let g = Graph::from_edges(8, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (6, 7)]).unwrap();
    let part = partition_unlabeled(&g, &[0, 1], 2).unwrap();
    assert!(!part.near.is_empty() && !part.far.is_empty());
    let mut rng = rng(8);
    for _ in 0..40 {
        let y = random_scores(&mut rng, 8);
        let (_, grad) = distance_aware_loss(&y, &part, 0.6, 0.3).unwrap();
        let num = numeric_vec_gradient(&y, |yy| distance_aware_loss(yy, &part, 0.6, 0.3).unwrap().0.total);
        for (a, n) in grad.iter().zip(&num) {
            assert!(fd_agrees(*a, *n), "{a} vs {n}");
        }
    }
}

#[test]
fn regularizer_gradient_wrt_representations() {
    let mut rng = rng(21);
    for _ in 0..20 {
        let g = random_graph(&mut rng, 9, 0.35);
        if g.num_edges() == 0 {
            continue;
        }
        let neg = NegativeSet::sample(&mut NegativeSampler::new(&g, rng.random()), &g, 3).unwrap();
        let mut z = DenseMatrix::zeros(9, 4);
        for x in z.as_mut_slice() {
            *x = rng.random_range(-1.0..1.0);
        }
        let r = structural_regularizer(&z, &g, &neg).unwrap();
        let num = numeric_vec_gradient(z.as_slice(), |zz| {
            let zm = DenseMatrix::from_vec(9, 4, zz.to_vec()).unwrap();
            structural_regularizer(&zm, &g, &neg).unwrap().value
        });
        for (a, n) in r.d_z.as_slice().iter().zip(&num) {
            assert!(fd_agrees(*a, *n), "{a} vs {n}");
        }
    }
}
