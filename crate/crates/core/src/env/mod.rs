//! The orchestration MDP: per-slot action application, routing resolution,
//! itemized costs and reward.
//!
//! Constraint violations never end an episode; they surface as penalty
//! items in [`CostBreakdown`].

mod action;
mod cost;
mod state;

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use action::{Action, ActionIter, ActionSpace, BranchKind, BsAction};
pub use cost::{evaluate, mec_delay, CostBreakdown, CostContext, RewardConfig, Utilization};
pub use state::{decode_previous, encode_state, encoded_len, State, FLAVOR_SCALE};

use crate::splits::{SplitCatalog, MAX_DEMAND_GBPS};
use crate::topology::Topology;
use crate::workload::{DemandSlot, ServiceClass, UtilizationModel};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub num_bs: usize,
    pub classes: Vec<ServiceClass>,
    /// DU/CU flavor set in RC.
    pub bbu_flavors: Vec<u32>,
    /// MEC flavor set in RC, shared by all classes.
    pub mec_flavors: Vec<u32>,
    pub reward: RewardConfig,
    pub utilization: UtilizationModel,
    #[serde(default)]
    pub catalog: SplitCatalog,
    /// Configuration in force before the first slot; defaults to
    /// [`ActionSpace::default_initial`].
    #[serde(default)]
    pub initial: Option<Action>,
    /// Reject legacy demands above the rate cap instead of clipping them.
    #[serde(default)]
    pub strict_demand: bool,
}

/// Four BSs, one inelastic and one elastic MEC class, 16 flavors each.
impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            num_bs: 4,
            classes: ServiceClass::default_pair(),
            bbu_flavors: (0..16).collect(),
            mec_flavors: (0..16).collect(),
            reward: RewardConfig::default(),
            utilization: UtilizationModel::platform_a(2),
            catalog: SplitCatalog::default(),
            initial: None,
            strict_demand: false,
        }
    }
}

impl EnvConfig {
    pub fn action_space(&self, topo: &Topology) -> Result<ActionSpace> {
        ActionSpace::new(topo, self.num_bs, self.classes.len(), self.bbu_flavors.clone(), self.mec_flavors.clone())
    }
}

/// Result of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub state: State,
    pub reward: f64,
    pub costs: CostBreakdown,
    pub terminal: bool,
}

pub struct Environment {
    topology: Arc<Topology>,
    config: EnvConfig,
    space: ActionSpace,
    initial: Action,
    episode: Vec<DemandSlot>,
    state: Option<State>,
    rng: ChaCha8Rng,
}

impl Environment {
    pub fn new(topology: Arc<Topology>, config: EnvConfig, seed: u64) -> Result<Self> {
        config.reward.validate()?;
        config.utilization.validate(config.classes.len())?;
        let space = config.action_space(&topology)?;
        let initial = match &config.initial {
            Some(a) => {
                space.validate(a)?;
                a.clone()
            }
            None => space.default_initial(),
        };
        Ok(Self {
            topology,
            config,
            space,
            initial,
            episode: Vec::new(),
            state: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn topology(&self) -> &Arc<Topology> {
        &self.topology
    }

    pub fn initial_action(&self) -> &Action {
        &self.initial
    }

    pub fn state(&self) -> Option<&State> {
        self.state.as_ref()
    }

    pub fn horizon(&self) -> usize {
        self.episode.len()
    }

    pub fn reset(&mut self, demands: Vec<DemandSlot>) -> Result<State> {
        let first = demands.first().ok_or(Error::EmptyEpisode)?;
        let services = self.config.classes.len() + 1;
        for slot in &demands {
            if slot.num_bs() < self.config.num_bs || slot.services() != services {
                return Err(Error::Workload(format!(
                    "slot {} has {} BSs x {} services, need {} x {services}",
                    slot.t,
                    slot.num_bs(),
                    slot.services(),
                    self.config.num_bs
                )));
            }
        }
        let state = State { t: 0, demands: self.view(first)?, previous: self.initial.clone() };
        self.episode = demands;
        self.state = Some(state.clone());
        Ok(state)
    }

    /// Restricts a slot to the configured BSs and applies the demand cap.
    fn view(&self, slot: &DemandSlot) -> Result<DemandSlot> {
        let services = self.config.classes.len() + 1;
        let mut out = DemandSlot::zeros(slot.t, self.config.num_bs, services);
        for k in 0..self.config.num_bs {
            for c in 0..services {
                let mut d = slot.get(k, c);
                if c == 0 && d > MAX_DEMAND_GBPS {
                    if self.config.strict_demand {
                        return Err(Error::DemandCap { demand: d, cap: MAX_DEMAND_GBPS });
                    }
                    log::warn!("slot {} BS {k}: clipping {d} Gbps to {MAX_DEMAND_GBPS}", slot.t);
                    d = MAX_DEMAND_GBPS;
                }
                out.set(k, c, d)?;
            }
        }
        Ok(out)
    }

    fn context(&self) -> CostContext<'_> {
        CostContext {
            topology: &self.topology,
            classes: &self.config.classes,
            reward: &self.config.reward,
            catalog: &self.config.catalog,
        }
    }

    /// Draws the realized utilization of `action` under the demands of
    /// `state`.
    pub fn sample_utilization(&mut self, state: &State, action: &Action) -> Utilization {
        utilization(&self.config.utilization, self.config.classes.len(), state, action, &mut self.rng)
    }

    /// Noise-free utilization of `action` under the demands of `state`.
    pub fn expected_utilization(&self, state: &State, action: &Action) -> Utilization {
        let model = UtilizationModel { noise_std: 0.0, ..self.config.utilization.clone() };
        // the generator is never drawn from without noise
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        utilization(&model, self.config.classes.len(), state, action, &mut rng)
    }

    /// Itemized costs of `action` in `state`, drawing fresh utilization.
    pub fn compute_costs(&mut self, state: &State, action: &Action) -> Result<CostBreakdown> {
        self.space.validate(action)?;
        let util = self.sample_utilization(state, action);
        self.costs_with(state, action, &util)
    }

    /// Itemized costs with a given realized utilization.
    pub fn costs_with(&self, state: &State, action: &Action, util: &Utilization) -> Result<CostBreakdown> {
        self.space.validate(action)?;
        evaluate(&self.context(), &state.demands, &state.previous, action, util)
    }

    pub fn step(&mut self, action: &Action) -> Result<Step> {
        self.advance(action, true)
    }

    /// Like [`Self::step`] with noise-free utilization and no generator
    /// draws.
    pub fn step_expected(&mut self, action: &Action) -> Result<Step> {
        self.advance(action, false)
    }

    fn advance(&mut self, action: &Action, noisy: bool) -> Result<Step> {
        let state = self.state.clone().ok_or(Error::EmptyEpisode)?;
        if state.t >= self.episode.len() {
            return Err(Error::EpisodeExhausted(self.episode.len()));
        }
        self.space.validate(action)?;
        let util = if noisy { self.sample_utilization(&state, action) } else { self.expected_utilization(&state, action) };
        let costs = self.costs_with(&state, action, &util)?;
        let t = state.t + 1;
        let terminal = t == self.episode.len();
        let demands = if terminal { state.demands.clone() } else { self.view(&self.episode[t])? };
        let next = State { t, demands, previous: action.clone() };
        self.state = Some(next.clone());
        Ok(Step { state: next, reward: costs.reward, costs, terminal })
    }
}

fn utilization<R: rand::Rng + ?Sized>(
    model: &UtilizationModel,
    classes: usize,
    state: &State,
    action: &Action,
    rng: &mut R,
) -> Utilization {
    let mut util = Utilization { du: Vec::new(), cu: Vec::new(), mec: Vec::new() };
    for (k, b) in action.bs.iter().enumerate() {
        let (x, y) = model.bbu_utilization(b.split, state.demands.legacy(k), rng);
        util.du.push(x);
        util.cu.push(y);
        for c in 0..classes {
            util.mec.push(model.mec_utilization(c, state.demands.mec(k, c), rng));
        }
    }
    util
}
