//! Learning agents: the epsilon-greedy branching double DQN baseline and the
//! Bayesian variant with Thompson sampling, plus the training loop that
//! drives either against an [`Environment`].

pub mod bayes;
pub mod bddqn;
mod replay;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use bayes::{select_action_thompson, td_target_bayes, update_posteriors, BlrPosterior, Posteriors, Weights};
pub use bddqn::{argmax, select_action_egreedy, td_target_bddqn, train_step_bddqn};
pub use replay::{Batch, ReplayBuffer, Transition};

use crate::env::{encode_state, encoded_len, Action, ActionSpace, CostBreakdown, Environment};
use crate::metrics::{EpisodeRecord, StepRecord};
use crate::neural::{Adam, AdamConfig, BranchingQNet, HeadMode, NetConfig};
use crate::workload::DemandSlot;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Thompson sampling over last-layer posteriors.
    Bayes,
    /// Linear Q heads with epsilon-greedy exploration.
    Egreedy,
}

impl core::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bayes" => Ok(Mode::Bayes),
            "egreedy" => Ok(Mode::Egreedy),
            other => Err(Error::Config(alloc::format!("unknown mode `{other}` (bayes|egreedy)"))),
        }
    }
}

/// Agent hyperparameters. Periods count environment slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub mode: Mode,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub lr: f64,
    pub gamma: f64,
    /// Posterior refresh period.
    #[serde(rename = "T_p")]
    pub t_p: u64,
    /// Target sync period.
    #[serde(rename = "T_g")]
    pub t_g: u64,
    /// Thompson resample period.
    #[serde(rename = "T_s")]
    pub t_s: u64,
    pub sigma_eps: f64,
    pub prior_sigma: f64,
    pub eps_max: f64,
    pub eps_min: f64,
    /// Episodes over which epsilon decays linearly to `eps_min`.
    pub eps_decay_episodes: usize,
    pub seed: u64,
    pub pretrained_checkpoint: Option<String>,
    /// Trunk widths, input layer first.
    pub hidden: Vec<usize>,
    pub feature_width: usize,
    /// Most recent matching transitions per sub-action posterior.
    pub posterior_cap: usize,
    /// Stored rewards are `reward_scale * reward`, clipped to
    /// `[-reward_clip, reward_clip]` when set.
    pub reward_scale: f64,
    pub reward_clip: Option<f64>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Bayes,
            batch_size: 128,
            buffer_capacity: 1_000_000,
            lr: 1e-4,
            gamma: 1.0,
            t_p: 1440,
            t_g: 1440,
            t_s: 144,
            sigma_eps: 1.0,
            prior_sigma: 1.0,
            eps_max: 1.0,
            eps_min: 0.05,
            eps_decay_episodes: 100,
            seed: 0,
            pretrained_checkpoint: None,
            hidden: vec![256, 256, 256],
            feature_width: 128,
            posterior_cap: 10_000,
            reward_scale: 1.0,
            reward_clip: None,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return bad("need 0 < batch_size <= buffer_capacity");
        }
        if self.t_p == 0 || self.t_g == 0 || self.t_s == 0 {
            return bad("T_p, T_g and T_s must be positive");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if !(self.lr > 0.0) || !(self.sigma_eps > 0.0) || !(self.prior_sigma > 0.0) {
            return bad("lr, sigma_eps and prior_sigma must be positive");
        }
        let unit = 0.0..=1.0;
        if !unit.contains(&self.eps_max) || !unit.contains(&self.eps_min) || self.eps_min > self.eps_max {
            return bad("need 0 <= eps_min <= eps_max <= 1");
        }
        if self.hidden.is_empty() || self.feature_width == 0 || self.posterior_cap == 0 {
            return bad("network widths and posterior_cap must be positive");
        }
        if !(self.reward_scale > 0.0) || !self.reward_scale.is_finite() {
            return bad("reward_scale must be positive");
        }
        if self.reward_clip.is_some_and(|c| !(c > 0.0)) {
            return bad("reward_clip must be positive");
        }
        Ok(())
    }

    /// Reward as stored in the replay buffer.
    pub fn stored_reward(&self, reward: f64) -> f64 {
        let r = reward * self.reward_scale;
        match self.reward_clip {
            Some(c) => r.clamp(-c, c),
            None => r,
        }
    }

    /// Linear decay from `eps_max` to `eps_min` over `eps_decay_episodes`.
    pub fn epsilon(&self, episode: usize) -> f64 {
        if self.eps_decay_episodes == 0 {
            return self.eps_min;
        }
        let frac = (episode as f64 / self.eps_decay_episodes as f64).min(1.0);
        self.eps_max - (self.eps_max - self.eps_min) * frac
    }

    pub fn net_config(&self, space: &ActionSpace) -> NetConfig {
        NetConfig {
            input: encoded_len(space),
            trunk: self.hidden.clone(),
            feature_width: self.feature_width,
            branch_sizes: space.branch_sizes(),
            mode: match self.mode {
                Mode::Bayes => HeadMode::Features,
                Mode::Egreedy => HeadMode::Linear,
            },
        }
    }
}

pub const CHECKPOINT_VERSION: u32 = 1;

/// Everything needed to resume or transfer an agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub mode: Mode,
    pub net: NetConfig,
    /// `(fan_in, fan_out)` of every layer.
    pub shapes: Vec<(usize, usize)>,
    pub params: Vec<f64>,
    pub target_params: Vec<f64>,
    pub adam: Adam,
    pub posteriors: Option<Posteriors>,
    pub count: u64,
    pub episodes: usize,
}

impl Checkpoint {
    /// Checks the version and that the shape table equals the one `expected`
    /// would build, entry for entry.
    pub fn validate(&self, expected: &NetConfig) -> Result<()> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(alloc::format!(
                "version {} (expected {CHECKPOINT_VERSION})",
                self.version
            )));
        }
        let want = expected.layer_shapes();
        if self.shapes != want || self.net.layer_shapes() != want || self.net != *expected {
            return Err(Error::Checkpoint(alloc::format!("shape table {:?} does not match {:?}", self.shapes, want)));
        }
        Ok(())
    }
}

/// One agent: networks, optimizer, replay buffer, posteriors and the slot
/// counter of the training schedule.
#[derive(Debug, Clone)]
pub struct Agent {
    config: AgentConfig,
    space: ActionSpace,
    net: BranchingQNet,
    target: BranchingQNet,
    adam: Adam,
    buffer: ReplayBuffer,
    posteriors: Option<Posteriors>,
    rng: ChaCha8Rng,
    count: u64,
    episodes: usize,
}

impl Agent {
    pub fn new(space: ActionSpace, config: AgentConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let net = BranchingQNet::new(config.net_config(&space), &mut rng)?;
        let target = net.clone_into_target();
        let adam = Adam::new(AdamConfig { lr: config.lr, ..AdamConfig::default() }, net.num_params());
        let posteriors = match config.mode {
            Mode::Bayes => {
                let mut p = Posteriors::new(&space.branch_sizes(), config.feature_width, config.sigma_eps, config.prior_sigma);
                p.thompson_sample(&mut rng);
                Some(p)
            }
            Mode::Egreedy => None,
        };
        Ok(Self {
            buffer: ReplayBuffer::new(config.buffer_capacity),
            config,
            space,
            net,
            target,
            adam,
            posteriors,
            rng,
            count: 0,
            episodes: 0,
        })
    }

    /// Agent initialized from a checkpoint of the same shape. The replay
    /// buffer starts empty; the optimizer learning rate follows `config`.
    pub fn from_checkpoint(space: ActionSpace, config: AgentConfig, ckpt: Checkpoint) -> Result<Self> {
        let mut agent = Self::new(space, config)?;
        if ckpt.mode != agent.config.mode {
            return Err(Error::Checkpoint("checkpoint was trained in the other mode".into()));
        }
        ckpt.validate(agent.net.config())?;
        let cfg = agent.net.config().clone();
        agent.net = BranchingQNet::from_params(cfg.clone(), ckpt.params).map_err(as_ckpt)?;
        agent.target = BranchingQNet::from_params(cfg, ckpt.target_params).map_err(as_ckpt)?;
        if !ckpt.adam.matches(agent.net.num_params()) {
            return Err(Error::Checkpoint("optimizer state does not match the parameter count".into()));
        }
        agent.adam = ckpt.adam;
        agent.adam.config.lr = agent.config.lr;
        match (&mut agent.posteriors, ckpt.posteriors) {
            (Some(p), Some(mut saved)) => {
                saved.validate(&agent.space.branch_sizes(), agent.config.feature_width)?;
                *p = saved;
            }
            (None, None) => {}
            _ => return Err(Error::Checkpoint("posterior presence does not match the mode".into())),
        }
        Ok(agent)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            mode: self.config.mode,
            net: self.net.config().clone(),
            shapes: self.net.config().layer_shapes(),
            params: self.net.params().to_vec(),
            target_params: self.target.params().to_vec(),
            adam: self.adam.clone(),
            posteriors: self.posteriors.clone(),
            count: self.count,
            episodes: self.episodes,
        }
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn net(&self) -> &BranchingQNet {
        &self.net
    }

    pub fn target(&self) -> &BranchingQNet {
        &self.target
    }

    pub fn posteriors(&self) -> Option<&Posteriors> {
        self.posteriors.as_ref()
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    /// Slots processed so far.
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn episodes(&self) -> usize {
        self.episodes
    }

    /// Exploring action for the training loop.
    pub fn explore(&mut self, state: &[f64]) -> Result<Vec<usize>> {
        match &self.posteriors {
            Some(p) => select_action_thompson(&self.net, p, state),
            None => {
                let eps = self.config.epsilon(self.episodes);
                select_action_egreedy(&self.net, state, eps, &mut self.rng)
            }
        }
    }

    /// Exploitation: per-branch argmax of the Q heads, or of the posterior
    /// means in Bayesian mode.
    pub fn greedy(&self, state: &[f64]) -> Result<Vec<usize>> {
        match &self.posteriors {
            Some(p) => bayes::select_with(&self.net, p, Weights::Mean, state),
            None => Ok(bddqn::greedy_indices(&self.net.forward(state)?, 0)),
        }
    }

    /// One minibatch update; `None` while the buffer is smaller than a batch.
    pub fn train_step(&mut self) -> Result<Option<f64>> {
        let Some(batch) = self.buffer.sample(self.config.batch_size, &mut self.rng) else {
            return Ok(None);
        };
        let loss = match &self.posteriors {
            Some(p) => bayes::train_step_bayes(&mut self.net, &self.target, p, &mut self.adam, &batch, self.config.gamma)?,
            None => train_step_bddqn(&mut self.net, &self.target, &mut self.adam, &batch, self.config.gamma)?,
        };
        if !self.net.all_finite() {
            return Err(Error::NonFiniteGradient(0));
        }
        Ok(Some(loss))
    }

    pub fn refresh_posteriors(&mut self) -> Result<()> {
        if let Some(p) = &mut self.posteriors {
            if !self.buffer.is_empty() {
                update_posteriors(&self.buffer, &self.net, &self.target, p, self.config.gamma, self.config.posterior_cap)?;
            }
        }
        Ok(())
    }

    pub fn sync_target(&mut self) {
        self.target = self.net.clone_into_target();
        if let Some(p) = &mut self.posteriors {
            p.sync_target();
        }
    }

    pub fn resample(&mut self) {
        if let Some(p) = &mut self.posteriors {
            p.thompson_sample(&mut self.rng);
        }
    }

    /// Runs one training episode over `demands`, following the per-slot
    /// schedule: posterior refresh, action, environment step, store, train,
    /// target sync, Thompson resample, counter increment.
    pub fn train_episode(
        &mut self,
        env: &mut Environment,
        demands: Vec<DemandSlot>,
        mut on_step: impl FnMut(&StepRecord),
    ) -> Result<EpisodeRecord> {
        let episode = self.episodes;
        let mut state = env.reset(demands)?;
        let mut s = encode_state(&self.space, &state)?;
        let mut costs: Vec<CostBreakdown> = Vec::with_capacity(env.horizon());
        let mut loss_sum = 0.0;
        let mut loss_n = 0usize;
        let cfg = self.config.clone();
        loop {
            if self.posteriors.is_some() && self.count % cfg.t_p == 0 {
                self.refresh_posteriors()?;
            }
            let idx = self.explore(&s)?;
            let action = self.space.decode(&idx)?;
            let step = env.step(&action)?;
            let s2 = encode_state(&self.space, &step.state)?;
            self.buffer.push(Transition {
                state: s,
                action: idx,
                reward: cfg.stored_reward(step.reward),
                next_state: s2.clone(),
                terminal: step.terminal,
            });
            if let Some(loss) = self.train_step()? {
                loss_sum += loss;
                loss_n += 1;
            }
            if self.count % cfg.t_g == 0 {
                self.sync_target();
            }
            if self.count % cfg.t_s == 0 {
                self.resample();
            }
            self.count += 1;
            on_step(&StepRecord::new(episode, state.t, &step.costs));
            costs.push(step.costs);
            if step.terminal {
                break;
            }
            state = step.state;
            s = s2;
        }
        let eps = match self.config.mode {
            Mode::Egreedy => self.config.epsilon(episode),
            Mode::Bayes => 0.0,
        };
        self.episodes += 1;
        let mean_loss = if loss_n == 0 { 0.0 } else { loss_sum / loss_n as f64 };
        Ok(EpisodeRecord::from_steps(episode, &costs, eps, mean_loss))
    }

    /// Plays one episode with the greedy policy without learning.
    pub fn evaluate_greedy(&self, env: &mut Environment, demands: Vec<DemandSlot>) -> Result<(EpisodeRecord, Vec<Action>)> {
        let mut state = env.reset(demands)?;
        let mut costs = Vec::with_capacity(env.horizon());
        let mut actions = Vec::with_capacity(env.horizon());
        loop {
            let s = encode_state(&self.space, &state)?;
            let action = self.space.decode(&self.greedy(&s)?)?;
            let step = env.step(&action)?;
            costs.push(step.costs);
            actions.push(action);
            if step.terminal {
                break;
            }
            state = step.state;
        }
        Ok((EpisodeRecord::from_steps(self.episodes, &costs, 0.0, 0.0), actions))
    }
}

fn as_ckpt(e: Error) -> Error {
    Error::Checkpoint(alloc::format!("{e}"))
}

/// Training log of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub episodes: Vec<EpisodeRecord>,
    pub steps: Vec<StepRecord>,
}

/// Trains for `episodes` episodes, drawing each episode's demands from
/// `demands`. On error the agent keeps the state of the last completed slot
/// and `log` holds everything recorded so far.
pub fn run_training(
    agent: &mut Agent,
    env: &mut Environment,
    episodes: usize,
    mut demands: impl FnMut(usize) -> Result<Vec<DemandSlot>>,
    log: &mut TrainingLog,
) -> Result<()> {
    for e in 0..episodes {
        let slots = demands(e)?;
        let steps = &mut log.steps;
        let record = agent.train_episode(env, slots, |s| steps.push(*s))?;
        log::info!(
            "episode {} mean reward {:.4} penalty {:.4}",
            record.episode,
            record.mean_reward,
            record.penalty_total
        );
        log.episodes.push(record);
    }
    Ok(())
}
