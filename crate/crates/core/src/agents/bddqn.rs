//! Non-Bayesian branching double DQN: per-branch linear Q heads,
//! epsilon-greedy exploration and a single global TD target.

use alloc::vec::Vec;

use rand::Rng;

use super::replay::Batch;
use crate::neural::{Adam, BranchOutputs, BranchingQNet};
use crate::Result;

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Per-branch argmax of the first row of `out`.
pub fn greedy_indices(out: &BranchOutputs, row: usize) -> Vec<usize> {
    (0..out.num_branches()).map(|b| argmax(out.branch(row, b))).collect()
}

/// With probability `1 - epsilon` the per-branch greedy action, otherwise an
/// independent uniform draw in every branch.
pub fn select_action_egreedy<R: Rng + ?Sized>(
    net: &BranchingQNet,
    state: &[f64],
    epsilon: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let explore = rng.random::<f64>() < epsilon;
    if explore {
        return Ok(net.config().branch_sizes.iter().map(|&n| rng.random_range(0..n)).collect());
    }
    Ok(greedy_indices(&net.forward(state)?, 0))
}

/// `u = r + gamma * mean_b Qt_b(s', argmax_a Q_b(s', a))`, or `u = r` for
/// terminal rows. Every base station has the same branch layout, so the
/// nested `1/K sum_k 1/M_k sum_m` average is the plain mean over branches.
pub fn td_target_bddqn(batch: &Batch, net: &BranchingQNet, target: &BranchingQNet, gamma: f64) -> Result<Vec<f64>> {
    let q_next = net.forward(&batch.next_states)?;
    let qt_next = target.forward(&batch.next_states)?;
    let nb = q_next.num_branches();
    Ok((0..batch.len())
        .map(|r| {
            if batch.terminals[r] {
                return batch.rewards[r];
            }
            let mut sum = 0.0;
            for b in 0..nb {
                sum += qt_next.branch(r, b)[argmax(q_next.branch(r, b))];
            }
            batch.rewards[r] + gamma * (sum / nb as f64)
        })
        .collect())
}

/// Loss `mean_rows mean_b (u - Q_b(s, a_b))^2` and its gradient at the
/// outputs; only the chosen sub-actions receive error.
pub fn bddqn_loss(q: &BranchOutputs, batch: &Batch, targets: &[f64]) -> (f64, BranchOutputs) {
    let nb = q.num_branches();
    let scale = 1.0 / (batch.len() * nb) as f64;
    let mut grad = q.zeros_like();
    let mut loss = 0.0;
    for r in 0..batch.len() {
        for b in 0..nb {
            let a = batch.action(r, b);
            let err = q.branch(r, b)[a] - targets[r];
            loss += err * err * scale;
            grad.branch_mut(r, b)[a] = 2.0 * err * scale;
        }
    }
    (loss, grad)
}

/// One Adam step on a minibatch; returns the pre-update loss.
pub fn train_step_bddqn(
    net: &mut BranchingQNet,
    target: &BranchingQNet,
    adam: &mut Adam,
    batch: &Batch,
    gamma: f64,
) -> Result<f64> {
    let u = td_target_bddqn(batch, net, target, gamma)?;
    let q = net.forward_train(&batch.states)?;
    let (loss, grad) = bddqn_loss(&q, batch, &u);
    let grads = net.backward(&grad)?;
    adam.step(net.params_mut(), &grads)?;
    Ok(loss)
}
