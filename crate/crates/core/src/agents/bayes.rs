//! Bayesian branching double DQN: a Gaussian posterior over the last-layer
//! weights of every sub-action, refreshed by closed-form Bayesian linear
//! regression on the network's branch features, and Thompson sampling.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::bddqn::argmax;
use super::replay::{Batch, ReplayBuffer};
use crate::linalg::{cholesky_inverse, cholesky_jittered, cholesky_solve, lower_mul};
use crate::neural::{gemm, Adam, BranchOutputs, BranchingQNet};
use crate::{Error, Result};

/// Jitter added to the diagonal when a factorization fails.
pub const JITTER: f64 = 1e-6;

/// Gaussian posterior `N(mean, L L^T)` over one sub-action's weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlrPosterior {
    pub mean: Vec<f64>,
    /// Lower Cholesky factor of the covariance, `d x d` row-major.
    pub cov_chol: Vec<f64>,
    /// Number of samples behind the current posterior.
    pub samples: usize,
}

impl BlrPosterior {
    /// Zero mean, covariance `prior_sigma * I`.
    pub fn prior(dim: usize, prior_sigma: f64) -> Self {
        let mut cov_chol = vec![0.0; dim * dim];
        let s = libm::sqrt(prior_sigma);
        for i in 0..dim {
            cov_chol[i * dim + i] = s;
        }
        Self { mean: vec![0.0; dim], cov_chol, samples: 0 }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Posterior from `n` feature rows (`phi`, `n x d`) and targets `u`:
    /// `cov = (phi^T phi / sigma_eps^2 + I / prior_sigma)^-1`,
    /// `mean = cov phi^T u / sigma_eps^2`.
    pub fn fit(dim: usize, phi: &[f64], u: &[f64], sigma_eps: f64, prior_sigma: f64) -> Result<Self> {
        let n = u.len();
        if phi.len() != n * dim {
            return Err(Error::Dimension { expected: n * dim, got: phi.len() });
        }
        if n == 0 {
            return Ok(Self::prior(dim, prior_sigma));
        }
        let noise = sigma_eps * sigma_eps;
        let mut precision = vec![0.0; dim * dim];
        gemm::matmul_at_b(dim, n, dim, phi, phi, 0.0, &mut precision);
        for (i, p) in precision.iter_mut().enumerate() {
            *p /= noise;
            if i % (dim + 1) == 0 {
                *p += 1.0 / prior_sigma;
            }
        }
        let (l, jitter) = cholesky_jittered(&precision, dim, JITTER)?;
        if jitter > 0.0 {
            log::warn!("posterior precision needed jitter {jitter:e}");
        }
        let mut rhs = vec![0.0; dim];
        gemm::matmul_at_b(dim, n, 1, phi, u, 0.0, &mut rhs);
        rhs.iter_mut().for_each(|v| *v /= noise);
        let mean = cholesky_solve(&l, dim, &rhs);
        let cov = cholesky_inverse(&l, dim);
        let (cov_chol, jitter) = cholesky_jittered(&cov, dim, JITTER)?;
        if jitter > 0.0 {
            log::warn!("posterior covariance needed jitter {jitter:e}");
        }
        Ok(Self { mean, cov_chol, samples: n })
    }

    /// Covariance `L L^T`.
    pub fn covariance(&self) -> Vec<f64> {
        let d = self.dim();
        let l = &self.cov_chol;
        let mut cov = vec![0.0; d * d];
        gemm::matmul_a_bt(d, d, d, l, l, 0.0, &mut cov);
        cov
    }

    /// `mean + L z` with `z ~ N(0, I)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let z: Vec<f64> = (0..self.dim()).map(|_| StandardNormal.sample(rng)).collect();
        let lz = lower_mul(&self.cov_chol, self.dim(), &z);
        self.mean.iter().zip(lz).map(|(m, e)| m + e).collect()
    }
}

/// Which weight set scores a sub-action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weights {
    /// Thompson sample `omega`.
    Sampled,
    /// Posterior mean `mu`.
    Mean,
    /// Target weights `omega~`, a copy of `mu` taken at the last sync.
    Target,
}

/// Posteriors, sampled weights and target weights of every sub-action of
/// every branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posteriors {
    pub dim: usize,
    pub sigma_eps: f64,
    pub prior_sigma: f64,
    /// `branches[b][a]`.
    pub branches: Vec<Vec<BlrPosterior>>,
    /// Flattened `[b][a][d]` Thompson samples.
    pub sampled: Vec<f64>,
    /// Flattened `[b][a][d]` target weights.
    pub target: Vec<f64>,
    offsets: Vec<usize>,
}

impl Posteriors {
    /// Prior everywhere, zero sampled and target weights.
    pub fn new(branch_sizes: &[usize], dim: usize, sigma_eps: f64, prior_sigma: f64) -> Self {
        let branches: Vec<Vec<BlrPosterior>> =
            branch_sizes.iter().map(|&n| vec![BlrPosterior::prior(dim, prior_sigma); n]).collect();
        let mut offsets = Vec::with_capacity(branch_sizes.len());
        let mut total = 0;
        for &n in branch_sizes {
            offsets.push(total);
            total += n * dim;
        }
        Self { dim, sigma_eps, prior_sigma, branches, sampled: vec![0.0; total], target: vec![0.0; total], offsets }
    }

    pub fn branch_sizes(&self) -> Vec<usize> {
        self.branches.iter().map(Vec::len).collect()
    }

    fn weights(&self, which: Weights, b: usize, a: usize) -> &[f64] {
        let start = self.offsets[b] + a * self.dim;
        match which {
            Weights::Sampled => &self.sampled[start..start + self.dim],
            Weights::Target => &self.target[start..start + self.dim],
            Weights::Mean => &self.branches[b][a].mean,
        }
    }

    pub fn weights_mut(&mut self, which: Weights, b: usize, a: usize) -> &mut [f64] {
        let start = self.offsets[b] + a * self.dim;
        match which {
            Weights::Sampled => &mut self.sampled[start..start + self.dim],
            Weights::Target => &mut self.target[start..start + self.dim],
            Weights::Mean => &mut self.branches[b][a].mean,
        }
    }

    /// `w_a^T phi` for every sub-action of branch `b`.
    pub fn scores(&self, which: Weights, b: usize, phi: &[f64]) -> Vec<f64> {
        (0..self.branches[b].len()).map(|a| dot(self.weights(which, b, a), phi)).collect()
    }

    pub fn score(&self, which: Weights, b: usize, a: usize, phi: &[f64]) -> f64 {
        dot(self.weights(which, b, a), phi)
    }

    /// Draws fresh Thompson weights for every sub-action.
    pub fn thompson_sample<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for b in 0..self.branches.len() {
            for a in 0..self.branches[b].len() {
                let w = self.branches[b][a].sample(rng);
                self.weights_mut(Weights::Sampled, b, a).copy_from_slice(&w);
            }
        }
    }

    /// `omega~ <- mu`.
    pub fn sync_target(&mut self) {
        for b in 0..self.branches.len() {
            for a in 0..self.branches[b].len() {
                let start = self.offsets[b] + a * self.dim;
                self.target[start..start + self.dim].copy_from_slice(&self.branches[b][a].mean);
            }
        }
    }

    /// Rebuilds the derived offset table after deserialization and checks
    /// every array against `branch_sizes` and `dim`.
    pub fn validate(&mut self, branch_sizes: &[usize], dim: usize) -> Result<()> {
        if self.dim != dim || self.branch_sizes() != branch_sizes {
            return Err(Error::Checkpoint("posterior shape does not match the network".into()));
        }
        let total: usize = branch_sizes.iter().map(|n| n * dim).sum();
        let ok_subs = self.branches.iter().flatten().all(|p| p.mean.len() == dim && p.cov_chol.len() == dim * dim);
        if !ok_subs || self.sampled.len() != total || self.target.len() != total {
            return Err(Error::Checkpoint("posterior arrays have the wrong length".into()));
        }
        self.offsets.clear();
        let mut off = 0;
        for &n in branch_sizes {
            self.offsets.push(off);
            off += n * dim;
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per branch, the sub-action maximizing `omega^T phi_b(s)`; ties go to the
/// lowest index.
pub fn select_action_thompson(net: &BranchingQNet, posteriors: &Posteriors, state: &[f64]) -> Result<Vec<usize>> {
    select_with(net, posteriors, Weights::Sampled, state)
}

/// Same as [`select_action_thompson`] with any weight set.
pub fn select_with(net: &BranchingQNet, posteriors: &Posteriors, which: Weights, state: &[f64]) -> Result<Vec<usize>> {
    let phi = net.forward(state)?;
    Ok((0..phi.num_branches()).map(|b| argmax(&posteriors.scores(which, b, phi.branch(0, b)))).collect())
}

/// `u = r + gamma * mean_b omega~_{a*}^T phi~_b(s')` with
/// `a* = argmax_a omega_a^T phi_b(s')`: the online network and the sampled
/// weights select, the target network and target weights evaluate.
pub fn td_target_bayes(
    batch: &Batch,
    net: &BranchingQNet,
    target: &BranchingQNet,
    posteriors: &Posteriors,
    gamma: f64,
) -> Result<Vec<f64>> {
    let phi = net.forward(&batch.next_states)?;
    let phi_t = target.forward(&batch.next_states)?;
    let nb = phi.num_branches();
    Ok((0..batch.len())
        .map(|r| {
            if batch.terminals[r] {
                return batch.rewards[r];
            }
            let mut sum = 0.0;
            for b in 0..nb {
                let best = argmax(&posteriors.scores(Weights::Sampled, b, phi.branch(r, b)));
                sum += posteriors.score(Weights::Target, b, best, phi_t.branch(r, b));
            }
            batch.rewards[r] + gamma * (sum / nb as f64)
        })
        .collect())
}

/// Loss `mean_rows mean_b (u - mu_{a_b}^T phi_b(s))^2` and its gradient at
/// the feature outputs.
pub fn bayes_loss(phi: &BranchOutputs, batch: &Batch, posteriors: &Posteriors, targets: &[f64]) -> (f64, BranchOutputs) {
    let nb = phi.num_branches();
    let scale = 1.0 / (batch.len() * nb) as f64;
    let mut grad = phi.zeros_like();
    let mut loss = 0.0;
    for r in 0..batch.len() {
        for b in 0..nb {
            let a = batch.action(r, b);
            let mean = &posteriors.branches[b][a].mean;
            let err = dot(mean, phi.branch(r, b)) - targets[r];
            loss += err * err * scale;
            for (g, m) in grad.branch_mut(r, b).iter_mut().zip(mean) {
                *g = 2.0 * err * scale * m;
            }
        }
    }
    (loss, grad)
}

/// One Adam step of the feature network against the posterior-mean
/// regression; returns the pre-update loss.
pub fn train_step_bayes(
    net: &mut BranchingQNet,
    target: &BranchingQNet,
    posteriors: &Posteriors,
    adam: &mut Adam,
    batch: &Batch,
    gamma: f64,
) -> Result<f64> {
    let u = td_target_bayes(batch, net, target, posteriors, gamma)?;
    let phi = net.forward_train(&batch.states)?;
    let (loss, grad) = bayes_loss(&phi, batch, posteriors, &u);
    let grads = net.backward(&grad)?;
    adam.step(net.params_mut(), &grads)?;
    Ok(loss)
}

/// Refits every sub-action posterior on its own slice of the replay
/// buffer: the most recent `cap` transitions that chose that sub-action,
/// with features from the online network and TD targets recomputed now.
/// Sub-actions without data return to the prior.
pub fn update_posteriors(
    buffer: &ReplayBuffer,
    net: &BranchingQNet,
    target: &BranchingQNet,
    posteriors: &mut Posteriors,
    gamma: f64,
    cap: usize,
) -> Result<()> {
    let sizes = posteriors.branch_sizes();
    let nb = sizes.len();
    // newest-first positions, per (branch, sub-action)
    let mut picks: Vec<Vec<Vec<usize>>> = sizes.iter().map(|&n| vec![Vec::new(); n]).collect();
    let mut used = Vec::new();
    for (i, t) in buffer.iter_newest_first().enumerate() {
        let mut wanted = false;
        for b in 0..nb {
            let list = &mut picks[b][t.action[b]];
            if list.len() < cap {
                list.push(used.len());
                wanted = true;
            }
        }
        if wanted {
            used.push(i);
        } else if picks.iter().flatten().all(|l| l.len() >= cap) {
            break;
        }
    }
    let dim = posteriors.dim;
    let mut features: Vec<BranchOutputs> = Vec::new();
    let mut targets: Vec<f64> = Vec::with_capacity(used.len());
    // evaluate in chunks to bound memory; `used` is ascending so a single
    // pass over the buffer gathers each chunk
    const CHUNK: usize = 1024;
    let mut iter = buffer.iter_newest_first().enumerate();
    for chunk in used.chunks(CHUNK) {
        let mut batch = Batch::default();
        for &want in chunk {
            let t = loop {
                let (i, t) = iter.next().expect("index within buffer");
                if i == want {
                    break t;
                }
            };
            batch.push(t);
        }
        targets.extend(td_target_bayes(&batch, net, target, posteriors, gamma)?);
        features.push(net.forward(&batch.states)?);
    }
    let row = |j: usize, b: usize| features[j / CHUNK].branch(j % CHUNK, b);
    for b in 0..nb {
        for a in 0..sizes[b] {
            let rows = &picks[b][a];
            let mut phi = Vec::with_capacity(rows.len() * dim);
            let mut u = Vec::with_capacity(rows.len());
            for &j in rows {
                phi.extend_from_slice(row(j, b));
                u.push(targets[j]);
            }
            posteriors.branches[b][a] = BlrPosterior::fit(dim, &phi, &u, posteriors.sigma_eps, posteriors.prior_sigma)?;
        }
    }
    Ok(())
}
