//! Full-graph training: forward, combined objective, backward, Adam.
//!
//! A run is a pure function of the dataset and the [`TrainConfig`]. The
//! seed keys two independent ChaCha streams, one for the initial weights
//! and one for negative sampling; negatives are redrawn every epoch.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::PUDataset;
use crate::error::{config, Error, Result};
use crate::gcn::{gcn_backward, gcn_forward, init_params_from_rng, ParamStore};
use crate::loss::{combined_objective, LossConfig, LossKind};
use crate::optim::{Adam, AdamConfig};
use crate::sampler::{NegativeSampler, NegativeSet};

const INIT_STREAM: u64 = 1;
const SAMPLER_STREAM: u64 = 2;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub seed: u64,
    pub log_every: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub loss: LossConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 400,
            learning_rate: 0.01,
            weight_decay: 5e-4,
            seed: 0,
            log_every: 1,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            loss: LossConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(config("epochs must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(config("learning_rate must be positive"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(config("weight_decay must be non-negative"));
        }
        if self.log_every < 1 {
            return Err(config("log_every must be at least 1"));
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return Err(config("Adam betas must lie in [0, 1)"));
        }
        if !(self.eps > 0.0) {
            return Err(config("Adam eps must be positive"));
        }
        self.loss.validate()
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
            weight_decay: self.weight_decay,
        }
    }
}

/// One line of the training log; the loss is evaluated before the update.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub total: f64,
    pub parts: Vec<(&'static str, f64)>,
    pub grad_norm: f64,
    pub skipped_negatives: usize,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: ParamStore,
    pub log: Vec<EpochRecord>,
    /// Scores of the final parameters.
    pub y_hat: Vec<f64>,
}

/// A run that stopped early, with the last parameters whose loss was finite.
#[derive(Clone, Debug)]
pub struct TrainFailure {
    pub error: Error,
    pub epoch: Option<usize>,
    pub last_good: Option<ParamStore>,
    pub log: Vec<EpochRecord>,
}

impl TrainFailure {
    fn before_start(error: Error) -> Self {
        Self {
            error,
            epoch: None,
            last_good: None,
            log: Vec::new(),
        }
    }
}

impl core::fmt::Display for TrainFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.epoch {
            Some(e) => write!(f, "training aborted at epoch {e}: {}", self.error),
            None => write!(f, "training not started: {}", self.error),
        }
    }
}

impl core::error::Error for TrainFailure {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Resolves `pi_p` from the dataset when it is unset.
pub fn resolve_loss(dataset: &PUDataset, loss: &LossConfig) -> LossConfig {
    let mut loss = loss.clone();
    if loss.pi_p.is_none() {
        loss.pi_p = Some(dataset.positive_fraction());
    }
    loss
}

pub fn train(dataset: &PUDataset, cfg: &TrainConfig) -> Result<TrainOutcome, TrainFailure> {
    cfg.validate().map_err(TrainFailure::before_start)?;
    if cfg.loss.kind == LossKind::DistanceAware && dataset.partition.delta != cfg.loss.delta {
        return Err(TrainFailure::before_start(config(alloc::format!(
            "dataset is partitioned at delta {} but the loss uses delta {}",
            dataset.partition.delta,
            cfg.loss.delta
        ))));
    }
    let loss = resolve_loss(dataset, &cfg.loss);
    loss.validate().map_err(TrainFailure::before_start)?;

    let mut params = init_params_from_rng(dataset.feature_dim(), &mut stream_rng(cfg.seed, INIT_STREAM))
        .map_err(TrainFailure::before_start)?;
    let mut sampler = NegativeSampler::from_rng(&dataset.graph, stream_rng(cfg.seed, SAMPLER_STREAM));
    let mut adam = Adam::new(cfg.adam(), &params);
    let mut log = Vec::new();
    let mut last_good: Option<ParamStore> = None;

    for epoch in 1..=cfg.epochs {
        let step = (|| -> Result<EpochRecord> {
            let cache = gcn_forward(&dataset.adjacency, &dataset.features, &params)?;
            let negatives = if loss.alpha > 0.0 {
                Some(NegativeSet::sample(&mut sampler, &dataset.graph, loss.k)?)
            } else {
                None
            };
            let obj = combined_objective(
                &cache.y_hat,
                &cache.z,
                &dataset.partition,
                &dataset.graph,
                &loss,
                negatives.as_ref(),
            )?;
            if !obj.value.total.is_finite() {
                return Err(Error::NonFinite("loss"));
            }
            params.zero_grad();
            gcn_backward(
                &dataset.adjacency,
                &dataset.features,
                &cache,
                &obj.d_y_hat,
                obj.d_z.as_ref(),
                &mut params,
            )?;
            Ok(EpochRecord {
                epoch,
                total: obj.value.total,
                parts: obj.value.parts,
                grad_norm: params.grad_norm(),
                skipped_negatives: obj.skipped_negatives,
            })
        })();
        let record = match step {
            Ok(r) => r,
            Err(error) => {
                return Err(TrainFailure {
                    error,
                    epoch: Some(epoch),
                    last_good,
                    log,
                })
            }
        };
        last_good = Some(params.clone());
        adam.step(&mut params);
        if epoch % cfg.log_every == 0 || epoch == cfg.epochs {
            log.push(record);
        }
    }

    let y_hat = match gcn_forward(&dataset.adjacency, &dataset.features, &params) {
        Ok(c) => c.y_hat,
        Err(error) => {
            return Err(TrainFailure {
                error,
                epoch: Some(cfg.epochs),
                last_good,
                log,
            })
        }
    };
    Ok(TrainOutcome { params, log, y_hat })
}
