//! Exhaustive search over stationary policies: ground truth for small
//! action spaces.

use alloc::vec::Vec;

use crate::env::{Action, CostBreakdown, Environment};
use crate::workload::DemandSlot;
use crate::{Error, Result};

/// Largest joint action space the oracle will enumerate.
pub const ORACLE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Best stationary action; ties go to the first in enumeration order.
    pub action: Action,
    /// Its average per-slot reward over the episode.
    pub mean_reward: f64,
    pub per_slot: Vec<CostBreakdown>,
    pub evaluated: u128,
}

/// Per-slot costs of applying `action` in every slot of `demands`, with
/// noise-free utilization. Only the first slot pays reconfiguration away
/// from the initial configuration.
pub fn evaluate_stationary(env: &mut Environment, demands: &[DemandSlot], action: &Action) -> Result<Vec<CostBreakdown>> {
    env.reset(demands.to_vec())?;
    let mut out = Vec::with_capacity(demands.len());
    loop {
        let step = env.step_expected(action)?;
        out.push(step.costs);
        if step.terminal {
            return Ok(out);
        }
    }
}

fn mean_reward(costs: &[CostBreakdown]) -> f64 {
    costs.iter().map(|c| c.reward).sum::<f64>() / costs.len() as f64
}

/// Evaluates every joint action as a stationary policy and returns the one
/// with the highest average reward.
pub fn stationary_oracle(env: &mut Environment, demands: &[DemandSlot]) -> Result<OracleResult> {
    if demands.is_empty() {
        return Err(Error::EmptyEpisode);
    }
    let space = env.space().clone();
    let mut best: Option<OracleResult> = None;
    let mut evaluated = 0u128;
    for action in space.enumerate(ORACLE_LIMIT)? {
        let per_slot = evaluate_stationary(env, demands, &action)?;
        let r = mean_reward(&per_slot);
        evaluated += 1;
        if best.as_ref().is_none_or(|b| r > b.mean_reward) {
            best = Some(OracleResult { action, mean_reward: r, per_slot, evaluated: 0 });
        }
    }
    let mut best = best.ok_or_else(|| Error::InvalidAction("empty action space".into()))?;
    best.evaluated = evaluated;
    Ok(best)
}
