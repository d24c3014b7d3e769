//! Metric logs and checkpoints on disk.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use oranmec_core::agents::Checkpoint;
use oranmec_core::metrics::{EpisodeRecord, StepRecord};

pub const STEP_HEADER: [&str; 8] = ["episode", "step", "reward", "J", "D", "penalty_total", "reconfig_total", "routing_total"];

pub const EPISODE_HEADER: [&str; 23] = [
    "episode",
    "steps",
    "total_reward",
    "mean_reward",
    "penalty_total",
    "epsilon",
    "mean_loss",
    "converged",
    "compute_du_mec",
    "compute_cu_mec",
    "sla_underprovision",
    "sla_server_capacity",
    "sla_split_delay",
    "sla_inelastic_delay",
    "instantiation",
    "reconfig_flavor",
    "reconfig_mec_migration",
    "reconfig_server_migration",
    "routing",
    "elastic_delay",
    "J",
    "reward",
    "greedy_mean_reward",
];

pub fn write_steps(path: &Path, steps: &[StepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    if steps.is_empty() {
        w.write_record(STEP_HEADER)?;
    }
    for s in steps {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_steps(path: &Path) -> Result<Vec<StepRecord>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    ensure!(r.headers()?.iter().eq(STEP_HEADER), "{}: not a step log", path.display());
    r.deserialize().map(|x| x.map_err(Into::into)).collect()
}

/// Episode log row; `greedy` is the greedy-policy evaluation of the same
/// episode when one was run.
fn episode_row(e: &EpisodeRecord, greedy: Option<f64>) -> Vec<String> {
    let c = &e.costs;
    let mut row = vec![
        e.episode.to_string(),
        e.steps.to_string(),
        e.total_reward.to_string(),
        e.mean_reward.to_string(),
        e.penalty_total.to_string(),
        e.epsilon.to_string(),
        e.mean_loss.to_string(),
        u8::from(e.converged).to_string(),
    ];
    row.extend(
        [
            c.compute_du_mec,
            c.compute_cu_mec,
            c.sla_underprovision,
            c.sla_server_capacity,
            c.sla_split_delay,
            c.sla_inelastic_delay,
            c.instantiation,
            c.reconfig_flavor,
            c.reconfig_mec_migration,
            c.reconfig_server_migration,
            c.routing,
            c.elastic_delay,
            c.total,
            c.reward,
        ]
        .iter()
        .map(f64::to_string),
    );
    row.push(greedy.map(|g| g.to_string()).unwrap_or_default());
    row
}

/// Writes an episode log. `greedy` is empty or one value per episode.
pub fn write_episodes(path: &Path, episodes: &[EpisodeRecord], greedy: &[f64]) -> Result<()> {
    write_episodes_with_seed(path, None, &[(0, episodes, greedy)])
}

/// Writes episode logs of several seeds into one file with a leading `seed`
/// column.
pub fn write_merged_episodes(path: &Path, runs: &[(u64, &[EpisodeRecord], &[f64])]) -> Result<()> {
    write_episodes_with_seed(path, Some(()), runs)
}

fn write_episodes_with_seed(path: &Path, seed_col: Option<()>, runs: &[(u64, &[EpisodeRecord], &[f64])]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut header: Vec<&str> = Vec::new();
    if seed_col.is_some() {
        header.push("seed");
    }
    header.extend(EPISODE_HEADER);
    w.write_record(&header)?;
    for (seed, episodes, greedy) in runs {
        ensure!(greedy.is_empty() || greedy.len() == episodes.len(), "greedy evaluations do not match the episodes");
        for (i, e) in episodes.iter().enumerate() {
            let mut row = Vec::with_capacity(header.len());
            if seed_col.is_some() {
                row.push(seed.to_string());
            }
            row.extend(episode_row(e, greedy.get(i).copied()));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-episode mean rewards from an episode log, or from a step log by
/// averaging the steps of each episode.
pub fn episode_rewards(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = r.headers()?.clone();
    if headers.iter().eq(STEP_HEADER) {
        let mut out: Vec<(usize, f64, usize)> = Vec::new();
        for s in read_steps(path)? {
            match out.last_mut() {
                Some((e, sum, n)) if *e == s.episode => {
                    *sum += s.reward;
                    *n += 1;
                }
                _ => out.push((s.episode, s.reward, 1)),
            }
        }
        return Ok(out.into_iter().map(|(_, sum, n)| sum / n as f64).collect());
    }
    let Some(col) = headers.iter().position(|h| h == "mean_reward") else {
        bail!("{}: neither an episode log nor a step log", path.display());
    };
    ensure!(!headers.iter().any(|h| h == "seed"), "{}: merged logs hold several runs; compare the per-seed files", path.display());
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let v: f64 = rec
            .get(col)
            .unwrap_or_default()
            .parse()
            .with_context(|| format!("{} row {}: bad mean_reward", path.display(), i + 2))?;
        out.push(v);
    }
    Ok(out)
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer(&mut w, ckpt)?;
    w.flush()?;
    Ok(())
}

/// Reads a checkpoint. Its shape table is checked against the network when
/// it is loaded into an agent.
pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let r = BufReader::new(File::open(path).with_context(|| format!("opening checkpoint {}", path.display()))?);
    serde_json::from_reader(r).with_context(|| format!("parsing checkpoint {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use oranmec_core::env::CostBreakdown;

    fn costs(r: f64) -> CostBreakdown {
        CostBreakdown { routing: 1.0, total: -r, reward: r, ..Default::default() }
    }

    #[test]
    fn step_log_header_and_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let steps = vec![StepRecord::new(0, 0, &costs(-1.5)), StepRecord::new(0, 1, &costs(-0.1 - 0.2))];
        write_steps(&path, &steps).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), "episode,step,reward,J,D,penalty_total,reconfig_total,routing_total");
        assert_eq!(read_steps(&path).unwrap(), steps);
        write_steps(&path, &[]).unwrap();
        assert!(read_steps(&path).unwrap().is_empty());
    }

    #[test]
    fn rewards_from_both_log_kinds() {
        let dir = tempfile::tempdir().unwrap();
        let steps_path = dir.path().join("s.csv");
        let eps_path = dir.path().join("e.csv");
        let steps: Vec<StepRecord> =
            (0..2).flat_map(|e| (0..3).map(move |t| StepRecord::new(e, t, &costs(-(e as f64) - t as f64)))).collect();
        write_steps(&steps_path, &steps).unwrap();
        assert_eq!(episode_rewards(&steps_path).unwrap(), vec![-1.0, -2.0]);
        let episodes: Vec<EpisodeRecord> =
            (0..2).map(|e| EpisodeRecord::from_steps(e, &[costs(-1.0 - e as f64)], 0.0, 0.0)).collect();
        write_episodes(&eps_path, &episodes, &[]).unwrap();
        assert_eq!(episode_rewards(&eps_path).unwrap(), vec![-1.0, -2.0]);
        let merged = dir.path().join("m.csv");
        write_merged_episodes(&merged, &[(3, &episodes, &[0.5, 0.25])]).unwrap();
        let text = std::fs::read_to_string(&merged).unwrap();
        assert!(text.starts_with("seed,episode,"));
        assert!(text.lines().nth(1).unwrap().starts_with("3,0,"));
        assert!(episode_rewards(&merged).is_err());
    }
}
