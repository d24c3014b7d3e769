use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gemm::{matmul, matmul_a_bt, matmul_at_b};
use crate::{Error, Result};

/// What each branch exposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadMode {
    /// A linear Q head per branch with `|A_km|` outputs.
    Linear,
    /// The branch representation `phi_km(s)` itself; Q values come from
    /// external last-layer weights.
    Features,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub input: usize,
    /// Widths of the trunk layers (input layer first), all rectified.
    pub trunk: Vec<usize>,
    /// Width F of every branch representation layer.
    pub feature_width: usize,
    /// Sub-action space size of every branch.
    pub branch_sizes: Vec<usize>,
    pub mode: HeadMode,
}

impl NetConfig {
    pub fn new(input: usize, branch_sizes: Vec<usize>, mode: HeadMode) -> Self {
        Self { input, trunk: vec![256, 256, 256], feature_width: 128, branch_sizes, mode }
    }

    /// Layer table `(fan_in, fan_out)`: trunk, fused branch features, heads.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes = Vec::new();
        let mut prev = self.input;
        for &w in &self.trunk {
            shapes.push((prev, w));
            prev = w;
        }
        shapes.push((prev, self.feature_width * self.branch_sizes.len()));
        if self.mode == HeadMode::Linear {
            shapes.extend(self.branch_sizes.iter().map(|&a| (self.feature_width, a)));
        }
        shapes
    }

    /// Output width of branch `b`.
    pub fn output_width(&self, b: usize) -> usize {
        match self.mode {
            HeadMode::Linear => self.branch_sizes[b],
            HeadMode::Features => self.feature_width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Layer {
    fan_in: usize,
    fan_out: usize,
    /// Offset of the `fan_in x fan_out` row-major weight block.
    weights: usize,
    bias: usize,
}

impl Layer {
    fn param_count(&self) -> usize {
        self.fan_in * self.fan_out + self.fan_out
    }
}

/// Per-branch outputs for a batch, stored row-major `batch x total` with
/// branch `b` occupying columns `offsets[b]..offsets[b] + widths[b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchOutputs {
    pub batch: usize,
    pub widths: Vec<usize>,
    pub offsets: Vec<usize>,
    pub total: usize,
    pub data: Vec<f64>,
}

impl BranchOutputs {
    fn zeros(batch: usize, widths: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(widths.len());
        let mut total = 0;
        for &w in &widths {
            offsets.push(total);
            total += w;
        }
        Self { batch, widths, offsets, total, data: vec![0.0; batch * total] }
    }

    /// Same layout, all zeros; handy for building loss gradients.
    pub fn zeros_like(&self) -> Self {
        Self { data: vec![0.0; self.data.len()], ..self.clone() }
    }

    pub fn branch(&self, row: usize, b: usize) -> &[f64] {
        let start = row * self.total + self.offsets[b];
        &self.data[start..start + self.widths[b]]
    }

    pub fn branch_mut(&mut self, row: usize, b: usize) -> &mut [f64] {
        let start = row * self.total + self.offsets[b];
        &mut self.data[start..start + self.widths[b]]
    }

    pub fn num_branches(&self) -> usize {
        self.widths.len()
    }
}

#[derive(Debug, Clone)]
struct Cache {
    batch: usize,
    /// Input followed by every rectified trunk activation.
    trunk: Vec<Vec<f64>>,
    /// Rectified fused branch features, `batch x (branches * F)`.
    features: Vec<f64>,
}

/// Shared trunk plus one representation layer (and optionally a linear Q
/// head) per action branch. Parameters live in a single flat vector.
#[derive(Debug, Clone)]
pub struct BranchingQNet {
    config: NetConfig,
    layers: Vec<Layer>,
    params: Vec<f64>,
    cache: Option<Cache>,
}

impl PartialEq for BranchingQNet {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.params == other.params
    }
}

impl BranchingQNet {
    /// Uniform fan-in initialization, `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`.
    pub fn new<R: Rng + ?Sized>(config: NetConfig, rng: &mut R) -> Result<Self> {
        let mut net = Self::zeroed(config)?;
        for layer in net.layers.clone() {
            let bound = 1.0 / libm::sqrt(layer.fan_in as f64);
            for p in &mut net.params[layer.weights..layer.weights + layer.param_count()] {
                *p = rng.random_range(-bound..=bound);
            }
        }
        Ok(net)
    }

    pub fn zeroed(config: NetConfig) -> Result<Self> {
        if config.input == 0 || config.feature_width == 0 || config.branch_sizes.is_empty() {
            return Err(Error::Config("network needs inputs, features and branches".into()));
        }
        if config.trunk.iter().chain(&config.branch_sizes).any(|&w| w == 0) {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        let mut layers = Vec::new();
        let mut offset = 0;
        for (fan_in, fan_out) in config.layer_shapes() {
            let layer = Layer { fan_in, fan_out, weights: offset, bias: offset + fan_in * fan_out };
            offset += layer.param_count();
            layers.push(layer);
        }
        Ok(Self { config, layers, params: vec![0.0; offset], cache: None })
    }

    /// Rebuilds a network from a parameter vector, validating its length
    /// against the layer table.
    pub fn from_params(config: NetConfig, params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeroed(config)?;
        if params.len() != net.params.len() {
            return Err(Error::Dimension { expected: net.params.len(), got: params.len() });
        }
        net.params = params;
        Ok(net)
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn num_branches(&self) -> usize {
        self.config.branch_sizes.len()
    }

    /// Head weights of branch `b` as `(F x |A_b|` row-major, bias`)`.
    pub fn head(&self, b: usize) -> Option<(&[f64], &[f64])> {
        if self.config.mode != HeadMode::Linear {
            return None;
        }
        let l = self.layers[self.config.trunk.len() + 1 + b];
        Some((
            &self.params[l.weights..l.bias],
            &self.params[l.bias..l.bias + l.fan_out],
        ))
    }

    pub fn head_mut(&mut self, b: usize) -> Option<(&mut [f64], &mut [f64])> {
        if self.config.mode != HeadMode::Linear {
            return None;
        }
        let l = self.layers[self.config.trunk.len() + 1 + b];
        let (w, rest) = self.params[l.weights..l.bias + l.fan_out].split_at_mut(l.bias - l.weights);
        Some((w, rest))
    }

    /// Copy of the network without cached activations.
    pub fn clone_into_target(&self) -> Self {
        Self { config: self.config.clone(), layers: self.layers.clone(), params: self.params.clone(), cache: None }
    }

    pub fn all_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    fn dense(&self, layer: Layer, batch: usize, input: &[f64], relu: bool) -> Vec<f64> {
        let mut out = Vec::with_capacity(batch * layer.fan_out);
        let bias = &self.params[layer.bias..layer.bias + layer.fan_out];
        for _ in 0..batch {
            out.extend_from_slice(bias);
        }
        matmul(batch, layer.fan_in, layer.fan_out, input, &self.params[layer.weights..layer.bias], 1.0, &mut out);
        if relu {
            out.iter_mut().for_each(|v| *v = v.max(0.0));
        }
        out
    }

    fn run(&self, inputs: &[f64]) -> Result<(BranchOutputs, Cache)> {
        let n_in = self.config.input;
        if inputs.is_empty() || inputs.len() % n_in != 0 {
            return Err(Error::Dimension { expected: n_in, got: inputs.len() });
        }
        let batch = inputs.len() / n_in;
        let depth = self.config.trunk.len();
        let mut trunk = Vec::with_capacity(depth + 1);
        trunk.push(inputs.to_vec());
        for i in 0..depth {
            let next = self.dense(self.layers[i], batch, &trunk[i], true);
            trunk.push(next);
        }
        let features = self.dense(self.layers[depth], batch, &trunk[depth], true);
        let f = self.config.feature_width;
        let nb = self.num_branches();
        let widths: Vec<usize> = (0..nb).map(|b| self.config.output_width(b)).collect();
        let mut out = BranchOutputs::zeros(batch, widths);
        match self.config.mode {
            HeadMode::Features => out.data.copy_from_slice(&features),
            HeadMode::Linear => {
                for b in 0..nb {
                    let head = self.layers[depth + 1 + b];
                    let a = head.fan_out;
                    // gather this branch's feature block, then apply its head
                    let mut phi = Vec::with_capacity(batch * f);
                    for r in 0..batch {
                        phi.extend_from_slice(&features[r * nb * f + b * f..r * nb * f + (b + 1) * f]);
                    }
                    let q = self.dense(head, batch, &phi, false);
                    for r in 0..batch {
                        out.branch_mut(r, b).copy_from_slice(&q[r * a..(r + 1) * a]);
                    }
                }
            }
        }
        Ok((out, Cache { batch, trunk, features }))
    }

    /// Batched inference: `inputs` holds `batch` rows of `input` values.
    pub fn forward(&self, inputs: &[f64]) -> Result<BranchOutputs> {
        self.run(inputs).map(|(out, _)| out)
    }

    /// Forward pass that keeps the activations for [`Self::backward`].
    pub fn forward_train(&mut self, inputs: &[f64]) -> Result<BranchOutputs> {
        let (out, cache) = self.run(inputs)?;
        self.cache = Some(cache);
        Ok(out)
    }

    /// Parameter gradient of a loss given its gradient at the outputs of
    /// the last [`Self::forward_train`] call.
    pub fn backward(&self, grad_out: &BranchOutputs) -> Result<Vec<f64>> {
        let cache = self.cache.as_ref().ok_or(Error::NoForwardPass)?;
        let batch = cache.batch;
        if grad_out.batch != batch || grad_out.num_branches() != self.num_branches() {
            return Err(Error::Dimension { expected: batch, got: grad_out.batch });
        }
        let depth = self.config.trunk.len();
        let f = self.config.feature_width;
        let nb = self.num_branches();
        let mut grads = vec![0.0; self.params.len()];

        let mut d_features = match self.config.mode {
            HeadMode::Features => {
                if grad_out.total != nb * f {
                    return Err(Error::Dimension { expected: nb * f, got: grad_out.total });
                }
                grad_out.data.clone()
            }
            HeadMode::Linear => {
                let mut d_features = vec![0.0; batch * nb * f];
                for b in 0..nb {
                    let head = self.layers[depth + 1 + b];
                    let a = head.fan_out;
                    let mut phi = Vec::with_capacity(batch * f);
                    let mut dq = Vec::with_capacity(batch * a);
                    for r in 0..batch {
                        phi.extend_from_slice(&cache.features[r * nb * f + b * f..r * nb * f + (b + 1) * f]);
                        dq.extend_from_slice(grad_out.branch(r, b));
                    }
                    matmul_at_b(f, batch, a, &phi, &dq, 0.0, &mut grads[head.weights..head.bias]);
                    for r in 0..batch {
                        for (g, d) in grads[head.bias..head.bias + a].iter_mut().zip(&dq[r * a..(r + 1) * a]) {
                            *g += d;
                        }
                    }
                    let mut dphi = vec![0.0; batch * f];
                    matmul_a_bt(batch, a, f, &dq, &self.params[head.weights..head.bias], 0.0, &mut dphi);
                    for r in 0..batch {
                        d_features[r * nb * f + b * f..r * nb * f + (b + 1) * f]
                            .copy_from_slice(&dphi[r * f..(r + 1) * f]);
                    }
                }
                d_features
            }
        };

        relu_mask(&mut d_features, &cache.features);
        let mut delta = d_features;
        for i in (0..=depth).rev() {
            let layer = self.layers[i];
            let input = &cache.trunk[i];
            matmul_at_b(layer.fan_in, batch, layer.fan_out, input, &delta, 0.0, &mut grads[layer.weights..layer.bias]);
            let gb = &mut grads[layer.bias..layer.bias + layer.fan_out];
            for row in delta.chunks(layer.fan_out) {
                for (g, d) in gb.iter_mut().zip(row) {
                    *g += d;
                }
            }
            if i == 0 {
                break;
            }
            let mut d_input = vec![0.0; batch * layer.fan_in];
            matmul_a_bt(batch, layer.fan_out, layer.fan_in, &delta, &self.params[layer.weights..layer.bias], 0.0, &mut d_input);
            relu_mask(&mut d_input, input);
            delta = d_input;
        }
        Ok(grads)
    }
}

fn relu_mask(grad: &mut [f64], activation: &[f64]) {
    for (g, &a) in grad.iter_mut().zip(activation) {
        if a <= 0.0 {
            *g = 0.0;
        }
    }
}
