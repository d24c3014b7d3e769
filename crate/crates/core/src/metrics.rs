//! Per-step and per-episode records, convergence detection and run
//! comparison.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::env::CostBreakdown;
use crate::{Error, Result};

/// Relative band around the final mean that counts as converged.
pub const CONVERGENCE_TOLERANCE: f64 = 0.05;
/// Trailing moving-average window for convergence.
pub const CONVERGENCE_WINDOW: usize = 10;
/// Fraction of trailing episodes averaged into the final mean.
pub const FINAL_FRACTION: f64 = 0.2;

/// One row of the per-step log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub episode: usize,
    pub step: usize,
    pub reward: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub penalty_total: f64,
    pub reconfig_total: f64,
    pub routing_total: f64,
}

impl StepRecord {
    pub fn new(episode: usize, step: usize, costs: &CostBreakdown) -> Self {
        Self {
            episode,
            step,
            reward: costs.reward,
            j: costs.total,
            d: costs.elastic_delay,
            penalty_total: costs.penalty_total(),
            reconfig_total: costs.reconfig_total(),
            routing_total: costs.routing,
        }
    }
}

/// Episode totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub steps: usize,
    pub total_reward: f64,
    pub mean_reward: f64,
    /// Summed itemized costs over the episode.
    pub costs: CostBreakdown,
    pub penalty_total: f64,
    /// Exploration rate in force (0 for Thompson sampling).
    pub epsilon: f64,
    pub mean_loss: f64,
    /// Set once the run is complete: this is the convergence episode.
    pub converged: bool,
}

impl EpisodeRecord {
    pub fn from_steps(episode: usize, costs: &[CostBreakdown], epsilon: f64, mean_loss: f64) -> Self {
        let mut sum = CostBreakdown::default();
        for c in costs {
            sum.accumulate(c);
        }
        let steps = costs.len();
        Self {
            episode,
            steps,
            total_reward: sum.reward,
            mean_reward: if steps == 0 { 0.0 } else { sum.reward / steps as f64 },
            penalty_total: sum.penalty_total(),
            costs: sum,
            epsilon,
            mean_loss,
            converged: false,
        }
    }
}

/// Mean of the last `ceil(20%)` of the values (at least one).
pub fn final_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Config("no episodes to summarize".into()));
    }
    let n = values.len();
    let tail = (libm::ceil(n as f64 * FINAL_FRACTION) as usize).clamp(1, n);
    Ok(values[n - tail..].iter().sum::<f64>() / tail as f64)
}

/// First episode (1-based) whose trailing moving average over
/// `min(10, i)` episodes lies within 5% of the final mean.
pub fn convergence_episode(values: &[f64]) -> Result<usize> {
    let target = final_mean(values)?;
    let band = CONVERGENCE_TOLERANCE * target.abs();
    let mut sum = 0.0;
    for i in 0..values.len() {
        sum += values[i];
        if i >= CONVERGENCE_WINDOW {
            sum -= values[i - CONVERGENCE_WINDOW];
        }
        let window = (i + 1).min(CONVERGENCE_WINDOW);
        if (sum / window as f64 - target).abs() <= band {
            return Ok(i + 1);
        }
    }
    // the last window always averages close to the tail in practice; fall
    // back to the final episode
    Ok(values.len())
}

/// Marks the convergence episode in a finished run.
pub fn mark_convergence(records: &mut [EpisodeRecord]) -> Result<usize> {
    let rewards: Vec<f64> = records.iter().map(|r| r.mean_reward).collect();
    let at = convergence_episode(&rewards)?;
    for r in records.iter_mut() {
        r.converged = r.episode + 1 == at;
    }
    Ok(at)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub episodes: usize,
    pub final_mean: f64,
    pub convergence_episode: usize,
    /// `(final_mean - reference) / |reference|` in percent, against the
    /// first run.
    pub diff_percent: f64,
}

/// Summarizes runs of equal length; the first run is the reference.
pub fn compare(runs: &[Vec<f64>]) -> Result<Vec<RunSummary>> {
    let first = runs.first().ok_or_else(|| Error::Config("nothing to compare".into()))?;
    if let Some(bad) = runs.iter().find(|r| r.len() != first.len()) {
        return Err(Error::Dimension { expected: first.len(), got: bad.len() });
    }
    let reference = final_mean(first)?;
    runs.iter()
        .map(|r| {
            let m = final_mean(r)?;
            let diff = if m == reference { 0.0 } else { 100.0 * (m - reference) / reference.abs() };
            Ok(RunSummary { episodes: r.len(), final_mean: m, convergence_episode: convergence_episode(r)?, diff_percent: diff })
        })
        .collect()
}
