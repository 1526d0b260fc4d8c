use locavqg_core::Scalar;
use serde::{Deserialize, Serialize};

use crate::params::{GradBuffer, ParamStore};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    /// Clip the global gradient norm to this value; `None` disables clipping.
    pub clip_norm: Option<f64>,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        Self {
            lr,
            ..Self::default()
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
            clip_norm: Some(1.0),
        }
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub config: AdamConfig,
    m: Vec<Tensor<T>>,
    v: Vec<Tensor<T>>,
    step: i32,
}

impl<T: Scalar> Adam<T> {
    pub fn new(config: AdamConfig, store: &ParamStore<T>) -> Self {
        let shapes: Vec<(usize, usize)> = store.ids().map(|id| store.get(id).shape()).collect();
        Self {
            config,
            m: shapes.iter().map(|&(r, c)| Tensor::zeros(r, c)).collect(),
            v: shapes.iter().map(|&(r, c)| Tensor::zeros(r, c)).collect(),
            step: 0,
        }
    }

    pub fn steps_taken(&self) -> i32 {
        self.step
    }

    pub fn step(&mut self, store: &mut ParamStore<T>, grads: &GradBuffer<T>) {
        self.step += 1;
        let c = &self.config;
        let mut clip = T::one();
        if let Some(max) = c.clip_norm {
            let norm = grads.global_norm();
            if norm > T::of(max) {
                clip = T::of(max) / norm;
            }
        }
        let (b1, b2) = (T::of(c.beta1), T::of(c.beta2));
        let bc1 = T::one() - T::of(c.beta1.powi(self.step));
        let bc2 = T::one() - T::of(c.beta2.powi(self.step));
        let (lr, eps, wd) = (T::of(c.lr), T::of(c.eps), T::of(c.weight_decay));
        for id in store.ids().collect::<Vec<_>>() {
            let g = grads.get(id);
            let m = &mut self.m[id.0];
            let v = &mut self.v[id.0];
            let p = store.get_mut(id);
            for (((pw, &gw), mw), vw) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                let gw = gw * clip + wd * *pw;
                *mw = b1 * *mw + (T::one() - b1) * gw;
                *vw = b2 * *vw + (T::one() - b2) * gw * gw;
                let mhat = *mw / bc1;
                let vhat = *vw / bc2;
                *pw -= lr * mhat / (vhat.sqrt() + eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adam_minimizes_a_quadratic() {
        let mut store = ParamStore::<f64>::new();
        let id = store.add("x", Tensor::row_vector(vec![3.0, -2.0]));
        let mut opt = Adam::new(
            AdamConfig {
                clip_norm: None,
                ..AdamConfig::with_lr(0.1)
            },
            &store,
        );
        for _ in 0..500 {
            let mut g = GradBuffer::zeros_like(&store);
            let grad = store.get(id).map(|x| 2.0 * x);
            g.accumulate(id, &grad);
            opt.step(&mut store, &g);
        }
        assert!(store.get(id).sq_norm() < 1e-4);
    }
}
