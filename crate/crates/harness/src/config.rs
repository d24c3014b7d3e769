//! Experiment configuration files (TOML).
//!
//! Numeric map keys such as `capacity_rc = { "1" = 20.0 }` are accepted:
//! files are parsed to a generic value first and then deserialized through
//! JSON, whose map keys may be numbers written as strings.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use oranmec_core::agents::AgentConfig;
use oranmec_core::env::{Action, EnvConfig, Environment, RewardConfig};
use oranmec_core::splits::SplitCatalog;
use oranmec_core::topology::{Topology, TopologyConfig};
use oranmec_core::workload::{constant_demands, synth_demands, DemandSlot, ServiceClass, SynthParams, UtilizationModel, SLOTS_PER_DAY};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::trace;

/// Parses TOML text into `T`.
pub fn from_toml_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let value: toml::Value = toml::from_str(text)?;
    let json = serde_json::to_value(value)?;
    Ok(serde_json::from_value(json)?)
}

pub fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    from_toml_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Platform {
    #[default]
    A,
    B,
}

/// Demand source for every episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WorkloadSource {
    /// CSV trace with header `t,bs,svc,demand_gbps`, cut into episodes.
    Trace { path: PathBuf },
    /// Seeded diurnal generator.
    Synthetic {
        seed: u64,
        horizon: usize,
        peak_gbps: f64,
        #[serde(default = "default_noise")]
        noise: f64,
    },
    /// The same per-BS demand rows (legacy first) in every slot.
    Constant { horizon: usize, demands: Vec<Vec<f64>> },
}

fn default_noise() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvSection {
    pub num_bs: usize,
    pub classes: Vec<ServiceClass>,
    pub bbu_flavors: Vec<u32>,
    pub mec_flavors: Vec<u32>,
    /// Measured demand-to-utilization model to use.
    pub platform: Platform,
    /// Replaces the platform model entirely when given.
    pub utilization: Option<UtilizationModel>,
    /// Overrides the model's noise level.
    pub noise_std: Option<f64>,
    pub initial: Option<Action>,
    pub strict_demand: bool,
    pub catalog: SplitCatalog,
    /// Slots per episode when cutting traces and synthetic workloads.
    pub slots_per_episode: usize,
}

impl Default for EnvSection {
    fn default() -> Self {
        let d = EnvConfig::default();
        Self {
            num_bs: d.num_bs,
            classes: d.classes,
            bbu_flavors: d.bbu_flavors,
            mec_flavors: d.mec_flavors,
            platform: Platform::A,
            utilization: None,
            noise_std: None,
            initial: None,
            strict_demand: false,
            catalog: d.catalog,
            slots_per_episode: SLOTS_PER_DAY,
        }
    }
}

/// Experiment file as written. Exactly one of `topology`, `topology_file`
/// and `default_cluster_seed` describes the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    #[serde(default)]
    pub topology: Option<TopologyConfig>,
    #[serde(default)]
    pub topology_file: Option<PathBuf>,
    #[serde(default)]
    pub default_cluster_seed: Option<u64>,
    pub workload: WorkloadSource,
    #[serde(default)]
    pub env: EnvSection,
    #[serde(default)]
    pub reward: RewardConfig,
    #[serde(default)]
    pub agent: AgentConfig,
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    /// Run seeds; defaults to the agent's `seed`.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    /// Play a greedy evaluation episode after every training episode.
    #[serde(default)]
    pub evaluate_greedy: bool,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_episodes() -> usize {
    100
}

fn default_out() -> PathBuf {
    PathBuf::from("runs")
}

/// A validated experiment with every referenced file loaded.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub topology: Arc<Topology>,
    pub env: EnvConfig,
    pub agent: AgentConfig,
    pub episodes: usize,
    pub seeds: Vec<u64>,
    pub evaluate_greedy: bool,
    pub out: PathBuf,
    /// Demand slots of every episode, cycled when training runs longer.
    pub episode_demands: Vec<Vec<DemandSlot>>,
    /// Directory relative paths in the file were resolved against.
    pub base_dir: PathBuf,
    pub platform: Platform,
    section: EnvSection,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self> {
        let file: ExperimentFile = read_toml(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_file(file, &base)
    }

    pub fn from_file(file: ExperimentFile, base_dir: &Path) -> Result<Self> {
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base_dir.join(p) };
        let topo_cfg = match (file.topology, &file.topology_file, file.default_cluster_seed) {
            (Some(t), None, None) => t,
            (None, Some(p), None) => read_toml(&resolve(p))?,
            (None, None, Some(seed)) => TopologyConfig::default_cluster(seed),
            _ => bail!("give exactly one of `topology`, `topology_file` and `default_cluster_seed`"),
        };
        let topology = Arc::new(Topology::build(&topo_cfg).context("building the topology")?);
        let seeds = file.seeds.unwrap_or_else(|| vec![file.agent.seed]);
        ensure!(!seeds.is_empty(), "`seeds` must not be empty");
        ensure!(file.episodes > 0, "`episodes` must be positive");
        file.agent.validate()?;
        let mut agent = file.agent;
        if let Some(p) = &agent.pretrained_checkpoint {
            let full = resolve(Path::new(p));
            ensure!(full.exists(), "pretrained checkpoint {} does not exist", full.display());
            agent.pretrained_checkpoint = Some(full.to_string_lossy().into_owned());
        }

        let section = file.env;
        let env = env_config(&section, file.reward)?;
        ensure!(
            env.num_bs <= topology.rus().len(),
            "{} BSs need as many RUs; the topology has {}",
            env.num_bs,
            topology.rus().len()
        );
        ensure!(section.slots_per_episode > 0, "`slots_per_episode` must be positive");
        let services = env.classes.len() + 1;
        let all = match &file.workload {
            WorkloadSource::Trace { path } => {
                let full = resolve(path);
                ensure!(full.exists(), "trace {} does not exist", full.display());
                trace::load(&full, env.num_bs, services)?
            }
            WorkloadSource::Synthetic { seed, horizon, peak_gbps, noise } => synth_demands(&SynthParams {
                seed: *seed,
                horizon: *horizon,
                num_bs: env.num_bs,
                mec_classes: env.classes.len(),
                peak_gbps: *peak_gbps,
                noise: *noise,
            })?,
            WorkloadSource::Constant { horizon, demands } => {
                ensure!(demands.len() == env.num_bs, "constant workload lists {} BSs, expected {}", demands.len(), env.num_bs);
                constant_demands(*horizon, demands)?
            }
        };
        ensure!(!all.is_empty(), "the workload has no slots");
        let episode_demands = match file.workload {
            // a constant workload defines exactly one episode
            WorkloadSource::Constant { .. } => vec![all],
            _ => split_episodes(all, section.slots_per_episode),
        };
        Ok(Self {
            topology,
            env,
            agent,
            episodes: file.episodes,
            seeds,
            evaluate_greedy: file.evaluate_greedy,
            out: resolve(&file.out),
            episode_demands,
            base_dir: base_dir.to_path_buf(),
            platform: section.platform,
            section,
        })
    }

    /// Switches the utilization model to another platform.
    pub fn set_platform(&mut self, platform: Platform) -> Result<()> {
        self.section.platform = platform;
        self.section.utilization = None;
        self.platform = platform;
        self.env = env_config(&self.section, self.env.reward)?;
        Ok(())
    }

    pub fn environment(&self, seed: u64) -> Result<Environment> {
        Ok(Environment::new(self.topology.clone(), self.env.clone(), seed)?)
    }

    /// Demands of training episode `e`.
    pub fn demands(&self, e: usize) -> Vec<DemandSlot> {
        self.episode_demands[e % self.episode_demands.len()].clone()
    }
}

fn env_config(s: &EnvSection, reward: RewardConfig) -> Result<EnvConfig> {
    let classes = s.classes.len();
    let mut utilization = match (&s.utilization, s.platform) {
        (Some(u), _) => u.clone(),
        (None, Platform::A) => UtilizationModel::platform_a(classes),
        (None, Platform::B) => UtilizationModel::platform_b(classes),
    };
    if let Some(n) = s.noise_std {
        utilization.noise_std = n;
    }
    let cfg = EnvConfig {
        num_bs: s.num_bs,
        classes: s.classes.clone(),
        bbu_flavors: s.bbu_flavors.clone(),
        mec_flavors: s.mec_flavors.clone(),
        reward,
        utilization,
        catalog: s.catalog.clone(),
        initial: s.initial.clone(),
        strict_demand: s.strict_demand,
    };
    cfg.reward.validate()?;
    cfg.utilization.validate(classes)?;
    Ok(cfg)
}

/// Cuts a slot sequence into episodes of `len` slots, renumbering each from
/// 0. A shorter tail becomes its own episode.
fn split_episodes(all: Vec<DemandSlot>, len: usize) -> Vec<Vec<DemandSlot>> {
    all.chunks(len)
        .map(|c| {
            c.iter()
                .enumerate()
                .map(|(t, s)| {
                    let mut s = s.clone();
                    s.t = t;
                    s
                })
                .collect()
        })
        .collect()
}
