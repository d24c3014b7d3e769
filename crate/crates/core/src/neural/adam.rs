use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-4, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// First and second moment estimates for a flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub config: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    beta1_power: f64,
    beta2_power: f64,
    steps: u64,
}

impl Adam {
    pub fn new(config: AdamConfig, num_params: usize) -> Self {
        Self { config, m: vec![0.0; num_params], v: vec![0.0; num_params], beta1_power: 1.0, beta2_power: 1.0, steps: 0 }
    }

    /// Whether the moment tables fit `num_params` parameters.
    pub fn matches(&self, num_params: usize) -> bool {
        self.m.len() == num_params && self.v.len() == num_params
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// One bias-corrected update. Non-finite gradients are rejected before
    /// any state changes.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Dimension { expected: self.m.len(), got: grads.len() });
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient(i));
        }
        let AdamConfig { lr, beta1, beta2, epsilon } = self.config;
        self.beta1_power *= beta1;
        self.beta2_power *= beta2;
        self.steps += 1;
        let c1 = 1.0 - self.beta1_power;
        let c2 = 1.0 - self.beta2_power;
        for ((p, &g), (m, v)) in params.iter_mut().zip(grads).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            *p -= lr * (*m / c1) / (sqrt(*v / c2) + epsilon);
        }
        Ok(())
    }
}

/// Correctly rounded either way; the std intrinsic lets the update loop
/// vectorize.
#[cfg(feature = "std")]
#[inline(always)]
fn sqrt(x: f64) -> f64 {
    x.sqrt()
}

#[cfg(not(feature = "std"))]
#[inline(always)]
fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
