//! Multi-seed training runs, the stationary oracle and run comparison.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{anyhow, ensure, Context, Result};
use oranmec_core::agents::{Agent, AgentConfig, Mode};
use oranmec_core::env::Action;
use oranmec_core::metrics::{compare, mark_convergence, EpisodeRecord, RunSummary, StepRecord};
use oranmec_core::oracle::stationary_oracle;
use serde::Serialize;

use crate::config::Experiment;
use crate::records;

/// Overrides applied on top of an experiment file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub mode: Option<Mode>,
    pub seeds: Option<Vec<u64>>,
    pub episodes: Option<usize>,
    pub out: Option<PathBuf>,
    pub pretrained: Option<PathBuf>,
    /// Worker threads; 0 picks the available parallelism.
    pub workers: usize,
}

/// Result of one seed. On failure the logs up to the failing slot and the
/// agent at that point are still written.
#[derive(Debug, Clone, Serialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub mode: Mode,
    #[serde(skip)]
    pub episodes: Vec<EpisodeRecord>,
    /// Greedy evaluation reward per episode, when enabled.
    #[serde(skip)]
    pub greedy: Vec<f64>,
    pub convergence_episode: Option<usize>,
    pub final_mean_reward: Option<f64>,
    pub steps_csv: PathBuf,
    pub episodes_csv: PathBuf,
    pub checkpoint: PathBuf,
    pub error: Option<String>,
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Bayes => "bayes",
        Mode::Egreedy => "egreedy",
    }
}

/// Environment noise stream of a run, kept apart from the agent's stream.
fn env_seed(seed: u64) -> u64 {
    seed ^ 0x5eed_0e0e_5eed_0e0e
}

/// Agent configuration of one run seed, with the pretrained checkpoint
/// resolved.
fn seed_config(exp: &Experiment, opts: &RunOptions, seed: u64) -> AgentConfig {
    let mut cfg = exp.agent.clone();
    if let Some(m) = opts.mode {
        cfg.mode = m;
    }
    if let Some(p) = &opts.pretrained {
        cfg.pretrained_checkpoint = Some(p.to_string_lossy().into_owned());
    }
    cfg.seed = seed;
    cfg
}

/// Builds the agent for `seed`, from the pretrained checkpoint if one is
/// configured.
pub fn build_agent(exp: &Experiment, cfg: AgentConfig) -> Result<Agent> {
    let env = exp.environment(0)?;
    let space = env.space().clone();
    match cfg.pretrained_checkpoint.clone() {
        Some(p) => {
            let ckpt = records::load_checkpoint(Path::new(&p))?;
            Agent::from_checkpoint(space, cfg, ckpt).with_context(|| format!("loading {p}"))
        }
        None => Ok(Agent::new(space, cfg)?),
    }
}

struct Trained {
    agent: Option<Agent>,
    episodes: Vec<EpisodeRecord>,
    steps: Vec<StepRecord>,
    greedy: Vec<f64>,
    error: Option<anyhow::Error>,
}

fn train_seed(exp: &Experiment, cfg: AgentConfig, episodes: usize, seed: u64) -> Trained {
    let mut out = Trained { agent: None, episodes: Vec::new(), steps: Vec::new(), greedy: Vec::new(), error: None };
    let setup = build_agent(exp, cfg).and_then(|a| Ok((a, exp.environment(env_seed(seed))?, exp.environment(env_seed(seed) ^ 1)?)));
    let (agent, mut env, mut eval_env) = match setup {
        Ok(x) => x,
        Err(e) => {
            out.error = Some(e);
            return out;
        }
    };
    let agent = out.agent.insert(agent);
    for e in 0..episodes {
        let steps = &mut out.steps;
        let record = match agent.train_episode(&mut env, exp.demands(e), |s| steps.push(*s)) {
            Ok(r) => r,
            Err(err) => {
                out.error = Some(anyhow!(err).context(format!("seed {seed} episode {e}")));
                return out;
            }
        };
        let greedy = if exp.evaluate_greedy {
            match agent.evaluate_greedy(&mut eval_env, exp.demands(e)) {
                Ok((g, _)) => Some(g.mean_reward),
                Err(err) => {
                    out.error = Some(anyhow!(err).context(format!("seed {seed} greedy evaluation {e}")));
                    return out;
                }
            }
        } else {
            None
        };
        log::info!(
            "{} seed {seed} episode {} mean reward {:.4} penalty {:.4}{}",
            mode_name(agent.config().mode),
            record.episode,
            record.mean_reward,
            record.penalty_total,
            greedy.map(|g| format!(" greedy {g:.4}")).unwrap_or_default()
        );
        out.greedy.extend(greedy);
        out.episodes.push(record);
    }
    out
}

fn write_seed(dir: &Path, seed: u64, mode: Mode, mut t: Trained) -> SeedOutcome {
    let stem = format!("{}_seed{seed}", mode_name(mode));
    let steps_csv = dir.join(format!("{stem}.steps.csv"));
    let episodes_csv = dir.join(format!("{stem}.episodes.csv"));
    let checkpoint = dir.join(format!("{stem}.checkpoint.json"));
    let mut convergence_episode = None;
    let mut final_mean_reward = None;
    if t.error.is_none() && !t.episodes.is_empty() {
        match mark_convergence(&mut t.episodes) {
            Ok(at) => convergence_episode = Some(at),
            Err(e) => t.error = Some(e.into()),
        }
        let rewards: Vec<f64> = t.episodes.iter().map(|e| e.mean_reward).collect();
        final_mean_reward = oranmec_core::metrics::final_mean(&rewards).ok();
    }
    let mut errors: Vec<String> = t.error.iter().map(|e| format!("{e:#}")).collect();
    let io = || -> Result<()> {
        records::write_steps(&steps_csv, &t.steps)?;
        records::write_episodes(&episodes_csv, &t.episodes, &t.greedy)?;
        if let Some(a) = &t.agent {
            records::save_checkpoint(&checkpoint, &a.checkpoint())?;
        }
        Ok(())
    };
    if let Err(e) = io() {
        errors.push(format!("writing results: {e:#}"));
    }
    SeedOutcome {
        seed,
        mode,
        episodes: t.episodes,
        greedy: t.greedy,
        convergence_episode,
        final_mean_reward,
        steps_csv,
        episodes_csv,
        checkpoint,
        error: if errors.is_empty() { None } else { Some(errors.join("; ")) },
    }
}

/// Trains one agent per seed, in parallel, and writes per-seed step and
/// episode logs, checkpoints, a merged episode log and a JSON summary into
/// the output directory. Every seed runs to completion or failure before
/// an error is returned.
pub fn run_experiment(exp: &Experiment, opts: &RunOptions) -> Result<Vec<SeedOutcome>> {
    let seeds = opts.seeds.clone().unwrap_or_else(|| exp.seeds.clone());
    ensure!(!seeds.is_empty(), "no seeds to run");
    let episodes = opts.episodes.unwrap_or(exp.episodes);
    ensure!(episodes > 0, "episodes must be positive");
    let out = opts.out.clone().unwrap_or_else(|| exp.out.clone());
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mode = opts.mode.unwrap_or(exp.agent.mode);
    // fail fast on a broken agent config or checkpoint
    build_agent(exp, seed_config(exp, opts, seeds[0]))?;

    let workers = match opts.workers {
        0 => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        n => n,
    }
    .min(seeds.len());
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<SeedOutcome>>> = Mutex::new(vec![None; seeds.len()]);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&seed) = seeds.get(i) else { break };
                let trained = train_seed(exp, seed_config(exp, opts, seed), episodes, seed);
                let outcome = write_seed(&out, seed, mode, trained);
                if let Some(e) = &outcome.error {
                    log::error!("seed {seed}: {e}");
                }
                results.lock().unwrap_or_else(|p| p.into_inner())[i] = Some(outcome);
            });
        }
    });
    let outcomes: Vec<SeedOutcome> = results
        .into_inner()
        .unwrap_or_else(|p| p.into_inner())
        .into_iter()
        .map(|o| o.expect("every seed is run"))
        .collect();

    let name = mode_name(mode);
    let runs: Vec<(u64, &[EpisodeRecord], &[f64])> =
        outcomes.iter().map(|o| (o.seed, o.episodes.as_slice(), o.greedy.as_slice())).collect();
    records::write_merged_episodes(&out.join(format!("{name}.episodes.csv")), &runs)?;
    // file names only, so runs written to different directories match
    let summary: Vec<SeedOutcome> = outcomes
        .iter()
        .map(|o| {
            let name = |p: &Path| PathBuf::from(p.file_name().unwrap_or_default());
            SeedOutcome {
                episodes: Vec::new(),
                greedy: Vec::new(),
                steps_csv: name(&o.steps_csv),
                episodes_csv: name(&o.episodes_csv),
                checkpoint: name(&o.checkpoint),
                ..o.clone()
            }
        })
        .collect();
    let summary = serde_json::to_string_pretty(&summary)?;
    std::fs::write(out.join(format!("{name}.summary.json")), summary)?;

    let failed: Vec<String> =
        outcomes.iter().filter_map(|o| o.error.as_ref().map(|e| format!("seed {}: {e}", o.seed))).collect();
    ensure!(failed.is_empty(), "{} of {} seeds failed: {}", failed.len(), outcomes.len(), failed.join("; "));
    Ok(outcomes)
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub action: Action,
    pub mean_reward: f64,
    pub evaluated: u128,
    pub slots: usize,
}

/// Best stationary action for the first episode's demands.
pub fn run_oracle(exp: &Experiment) -> Result<OracleReport> {
    let mut env = exp.environment(0)?;
    let demands = exp.demands(0);
    let slots = demands.len();
    let r = stationary_oracle(&mut env, &demands)?;
    Ok(OracleReport { action: r.action, mean_reward: r.mean_reward, evaluated: r.evaluated, slots })
}

/// Summaries of episode or step logs; the first file is the reference.
pub fn compare_files(paths: &[PathBuf]) -> Result<Vec<RunSummary>> {
    ensure!(!paths.is_empty(), "nothing to compare");
    let runs = paths.iter().map(|p| records::episode_rewards(p)).collect::<Result<Vec<_>>>()?;
    if let Some((p, r)) = paths.iter().zip(&runs).find(|(_, r)| r.len() != runs[0].len()) {
        anyhow::bail!("{} has {} episodes, {} has {}", p.display(), r.len(), paths[0].display(), runs[0].len());
    }
    Ok(compare(&runs)?)
}
