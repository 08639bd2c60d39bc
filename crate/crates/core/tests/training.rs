mod support;

use pugnn_core::dataset::PUDataset;
use pugnn_core::graph::Graph;
use pugnn_core::loss::LossKind;
use pugnn_core::metrics::macro_f1;
use pugnn_core::tensor::DenseMatrix;
use pugnn_core::train::{train, TrainConfig};
use pugnn_core::Error;

fn bits(p: &pugnn_core::ParamStore) -> Vec<u64> {
    p.iter().flat_map(|(_, p)| p.value.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>()).collect()
}

fn path_dataset(n: usize, labeled: &[usize], delta: u32) -> PUDataset {
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    let g = Graph::from_edges(n, &edges).unwrap();
    let x = DenseMatrix::from_vec(n, 2, (0..2 * n).map(|i| ((i * 7) % 5) as f64 / 5.0).collect()).unwrap();
    let truth: Vec<bool> = (0..n).map(|v| v < n / 2).collect();
    let train_mask = vec![true; n];
    let mut lab = vec![false; n];
    for &v in labeled {
        lab[v] = true;
    }
    PUDataset::new(g, x, truth, train_mask, lab, delta).unwrap()
}

#[test]
fn same_seed_same_run() {
    let d = support::sbm_dataset(4, 3, 3);
    let cfg = TrainConfig {
        epochs: 20,
        seed: 9,
        ..Default::default()
    };
    let a = train(&d, &cfg).unwrap();
    let b = train(&d, &cfg).unwrap();
    assert_eq!(bits(&a.params), bits(&b.params));
    assert_eq!(a.log, b.log);
    let c = train(&d, &TrainConfig { seed: 10, ..cfg }).unwrap();
    assert_ne!(bits(&a.params), bits(&c.params));
}

#[test]
fn single_labeled_node_is_driven_to_one() {
    let d = path_dataset(5, &[0], 3);
    let mut cfg = TrainConfig {
        epochs: 300,
        learning_rate: 0.05,
        ..Default::default()
    };
    cfg.loss.alpha = 0.0;
    let out = train(&d, &cfg).unwrap();
    assert!(out.y_hat[0] > 0.99, "{}", out.y_hat[0]);
}

#[test]
fn log_schedule() {
    let d = path_dataset(6, &[0], 3);
    let cfg = TrainConfig {
        epochs: 10,
        log_every: 4,
        ..Default::default()
    };
    let out = train(&d, &cfg).unwrap();
    let epochs: Vec<_> = out.log.iter().map(|r| r.epoch).collect();
    assert_eq!(epochs, vec![4, 8, 10]);
    let r = &out.log[0];
    let sum: f64 = r.parts.iter().filter(|(n, _)| *n != "regularizer").map(|p| p.1).sum::<f64>()
        + cfg.loss.alpha * r.parts.iter().find(|(n, _)| *n == "regularizer").unwrap().1;
    assert!((sum - r.total).abs() < 1e-12);
}

// With the far set empty and the near prior equal to the class prior, the
// distance-aware run must replay the Dist-PU run exactly.
#[test]
fn distance_aware_replays_distpu_when_far_set_is_empty() {
    let d = path_dataset(8, &[0, 2], 7);
    assert!(d.partition.far.is_empty());
    let mut cfg = TrainConfig {
        epochs: 50,
        seed: 3,
        ..Default::default()
    };
    cfg.loss.alpha = 0.0;
    cfg.loss.delta = 7;
    cfg.loss.pi_p = Some(0.45);
    cfg.loss.pi_hat = 0.45;
    cfg.loss.pi_breve = 0.1;
    let da = train(&d, &cfg).unwrap();
    cfg.loss.kind = LossKind::Distpu;
    let dp = train(&d, &cfg).unwrap();
    assert_eq!(bits(&da.params), bits(&dp.params));
    let totals = |o: &pugnn_core::TrainOutcome| o.log.iter().map(|r| r.total.to_bits()).collect::<Vec<_>>();
    assert_eq!(totals(&da), totals(&dp));
}

#[test]
fn sbm_distance_aware_separates_blocks() {
    for seed in 0..5 {
        let d = support::sbm_dataset(seed, 3, 3);
        let cfg = TrainConfig {
            epochs: 200,
            seed,
            ..Default::default()
        };
        let out = train(&d, &cfg).unwrap();
        let f = macro_f1(&out.y_hat, &d.true_label, &d.test_mask).unwrap();
        assert!(f.macro_f1 > 90.0, "seed {seed}: {}", f.macro_f1);
    }
}

#[test]
fn overflow_aborts_with_last_good_parameters() {
    let mut d = path_dataset(6, &[0], 3);
    d.features.as_mut_slice().iter_mut().for_each(|x| *x += 10.0);
    let cfg = TrainConfig {
        epochs: 5,
        learning_rate: 1e300,
        ..Default::default()
    };
    let fail = train(&d, &cfg).unwrap_err();
    assert_eq!(fail.epoch, Some(2));
    assert!(matches!(fail.error, Error::NonFinite(_)));
    let good = fail.last_good.unwrap();
    assert!(good.iter().all(|(_, p)| p.value.is_finite()));
    assert_eq!(fail.log.len(), 1);
}

#[test]
fn configuration_errors_stop_before_training() {
    let d = path_dataset(6, &[0], 3);
    let bad = TrainConfig {
        epochs: 0,
        ..Default::default()
    };
    assert!(matches!(train(&d, &bad).unwrap_err().error, Error::Config(_)));
    let mut mismatch = TrainConfig::default();
    mismatch.loss.delta = 2;
    let fail = train(&d, &mismatch).unwrap_err();
    assert!(fail.epoch.is_none() && fail.last_good.is_none());
}
