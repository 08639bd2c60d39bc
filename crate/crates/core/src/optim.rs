use alloc::vec::Vec;

use crate::gcn::ParamStore;
use crate::math;
use crate::tensor::DenseMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Decoupled decay, applied to weights only.
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 5e-4,
        }
    }
}

/// Adam with bias correction and decoupled weight decay.
#[derive(Clone, Debug)]
pub struct Adam {
    cfg: AdamConfig,
    step: i32,
    first: Vec<DenseMatrix>,
    second: Vec<DenseMatrix>,
}

impl Adam {
    pub fn new(cfg: AdamConfig, params: &ParamStore) -> Self {
        let zeros = || {
            params
                .iter()
                .map(|(_, p)| DenseMatrix::zeros(p.value.rows(), p.value.cols()))
                .collect()
        };
        Self {
            cfg,
            step: 0,
            first: zeros(),
            second: zeros(),
        }
    }

    pub fn step_count(&self) -> i32 {
        self.step
    }

    /// One update from the gradients currently stored in `params`.
    pub fn step(&mut self, params: &mut ParamStore) {
        self.step += 1;
        let AdamConfig {
            learning_rate: lr,
            beta1,
            beta2,
            eps,
            weight_decay,
        } = self.cfg;
        let bc1 = 1.0 - libm::pow(beta1, self.step as f64);
        let bc2 = 1.0 - libm::pow(beta2, self.step as f64);
        for (((name, p), m), v) in params.iter_mut().zip(&mut self.first).zip(&mut self.second) {
            let decay = if ParamStore::is_weight(name) { weight_decay } else { 0.0 };
            let values = p.value.as_mut_slice();
            let grads = p.grad.as_slice();
            for (((w, &g), m), v) in values
                .iter_mut()
                .zip(grads)
                .zip(m.as_mut_slice())
                .zip(v.as_mut_slice())
            {
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *w -= lr * decay * *w;
                *w -= lr * m_hat / (math::sqrt(v_hat) + eps);
            }
        }
    }
}
