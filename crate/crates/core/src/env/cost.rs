//! Monetary cost model and scalarized reward.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::action::Action;
use crate::splits::SplitCatalog;
use crate::topology::{NodeId, Topology};
use crate::workload::{DemandSlot, ServiceClass};
use crate::Result;

/// Unit prices ($ per input unit), reward weights and MEC delay-model
/// coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    pub kappa_dm: f64,
    pub kappa_cm: f64,
    pub kappa_d: f64,
    pub kappa_i: f64,
    pub kappa_r: f64,
    pub kappa_h: f64,
    /// Relative weight of the elastic delay cost.
    pub eta: f64,
    /// Slope of the delay-to-money map; the reward is `-J - eta * b * D`.
    pub delay_coef: f64,
    pub delta1: f64,
    pub delta2: f64,
    /// Delay assigned to a MEC flow with demand but no allocated resources.
    pub max_delay_ms: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            kappa_dm: 0.25,
            kappa_cm: 0.125,
            kappa_d: 5.0,
            kappa_i: 0.05,
            kappa_r: 0.05,
            kappa_h: 1.0,
            eta: 1.0,
            delay_coef: 1.0,
            delta1: 1.0,
            delta2: 1.0,
            max_delay_ms: 1e3,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.kappa_dm,
            self.kappa_cm,
            self.kappa_d,
            self.kappa_i,
            self.kappa_r,
            self.kappa_h,
            self.eta,
            self.delay_coef,
            self.delta1,
            self.delta2,
            self.max_delay_ms,
        ];
        if all.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(crate::Error::Config("reward coefficients must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Itemized costs of one slot. Every item is already in monetary units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub compute_du_mec: f64,
    pub compute_cu_mec: f64,
    pub sla_underprovision: f64,
    pub sla_server_capacity: f64,
    pub sla_split_delay: f64,
    pub sla_inelastic_delay: f64,
    pub instantiation: f64,
    pub reconfig_flavor: f64,
    pub reconfig_mec_migration: f64,
    pub reconfig_server_migration: f64,
    pub routing: f64,
    /// Summed delay of the elastic MEC flows (delay units, not money).
    pub elastic_delay: f64,
    /// Operation cost J: every monetary item above.
    pub total: f64,
    pub reward: f64,
}

impl CostBreakdown {
    pub fn penalty_total(&self) -> f64 {
        self.sla_underprovision + self.sla_server_capacity + self.sla_split_delay + self.sla_inelastic_delay
    }

    pub fn reconfig_total(&self) -> f64 {
        self.instantiation + self.reconfig_flavor + self.reconfig_mec_migration + self.reconfig_server_migration
    }

    pub fn compute_total(&self) -> f64 {
        self.compute_du_mec + self.compute_cu_mec
    }

    fn finish(&mut self, rc: &RewardConfig) {
        self.total = self.compute_total() + self.penalty_total() + self.reconfig_total() + self.routing;
        self.reward = -self.total - rc.eta * rc.delay_coef * self.elastic_delay;
    }

    /// Element-wise sum, used for per-episode aggregates.
    pub fn accumulate(&mut self, other: &CostBreakdown) {
        self.compute_du_mec += other.compute_du_mec;
        self.compute_cu_mec += other.compute_cu_mec;
        self.sla_underprovision += other.sla_underprovision;
        self.sla_server_capacity += other.sla_server_capacity;
        self.sla_split_delay += other.sla_split_delay;
        self.sla_inelastic_delay += other.sla_inelastic_delay;
        self.instantiation += other.instantiation;
        self.reconfig_flavor += other.reconfig_flavor;
        self.reconfig_mec_migration += other.reconfig_mec_migration;
        self.reconfig_server_migration += other.reconfig_server_migration;
        self.routing += other.routing;
        self.elastic_delay += other.elastic_delay;
        self.total += other.total;
        self.reward += other.reward;
    }
}

/// Actual compute utilization per BS (RC): DU, CU and per MEC class.
#[derive(Debug, Clone, PartialEq)]
pub struct Utilization {
    pub du: Vec<f64>,
    pub cu: Vec<f64>,
    /// `[k][c]` row-major over MEC classes.
    pub mec: Vec<f64>,
}

impl Utilization {
    pub fn mec(&self, k: usize, c: usize, classes: usize) -> f64 {
        self.mec[k * classes + c]
    }
}

/// Total delay of a MEC flow: transport plus processing plus a
/// load-dependent term.
///
/// `lambda * path_delay + delta1 * lambda * rate / z + delta2 * (util / capacity)^2`;
/// a flow with demand but `z = 0` gets `max_delay`.
#[allow(clippy::too_many_arguments)]
pub fn mec_delay(
    lambda: f64,
    path_delay: f64,
    rate: f64,
    flavor: f64,
    utilization: f64,
    capacity: f64,
    rc: &RewardConfig,
) -> f64 {
    if flavor <= 0.0 {
        if lambda > 0.0 {
            log::debug!("MEC flow of {lambda} Gbps has no resources; using max delay");
            return rc.max_delay_ms;
        }
        return rc.delta2 * (utilization / capacity) * (utilization / capacity);
    }
    lambda * path_delay + rc.delta1 * (lambda * rate / flavor) + rc.delta2 * (utilization / capacity) * (utilization / capacity)
}

/// Everything the cost model needs about the world besides the action.
pub struct CostContext<'a> {
    pub topology: &'a Topology,
    pub classes: &'a [ServiceClass],
    pub reward: &'a RewardConfig,
    pub catalog: &'a SplitCatalog,
}

/// Itemized costs of applying `action` after `previous` under `demands`
/// (legacy demands already capped) and the realized `util`.
pub fn evaluate(
    ctx: &CostContext<'_>,
    demands: &DemandSlot,
    previous: &Action,
    action: &Action,
    util: &Utilization,
) -> Result<CostBreakdown> {
    let rc = ctx.reward;
    let classes = ctx.classes.len();
    let mut out = CostBreakdown::default();
    let mut server_load: BTreeMap<NodeId, f64> = BTreeMap::new();

    for (k, (a, prev)) in action.bs.iter().zip(&previous.bs).enumerate() {
        let du_side = a.du_side_load();
        let cu_side = a.cu_side_load();
        out.compute_du_mec += rc.kappa_dm * du_side;
        out.compute_cu_mec += rc.kappa_cm * cu_side;

        let x = f64::from(a.du_flavor);
        let y = f64::from(a.cu_flavor);
        let mut under = 0.0f64.max(util.du[k] - x).max(util.cu[k] - y);
        for c in 0..classes {
            under += 0.0f64.max(util.mec(k, c, classes) - f64::from(a.mec_flavor[c]));
        }
        out.sla_underprovision += rc.kappa_d * under;

        *server_load.entry(a.du_server).or_default() += du_side;
        *server_load.entry(a.cu_server).or_default() += cu_side;

        let paths = ctx.topology.shortest_paths(k, a.du_server, a.cu_server)?;
        let (hls_deadline, lls_deadline) = a.split.delay_requirements();
        let late = 0.0f64
            .max(paths.fronthaul.delay_ms - lls_deadline)
            .max(paths.midhaul.delay_ms - hls_deadline);
        out.sla_split_delay += rc.kappa_d * late;

        for (c, class) in ctx.classes.iter().enumerate() {
            let at_cu = a.mec_at_cu[c];
            let host = if at_cu { a.cu_server } else { a.du_server };
            let d = mec_delay(
                demands.mec(k, c),
                paths.mec_delay_ms(at_cu),
                ctx.topology.rate(host),
                f64::from(a.mec_flavor[c]),
                util.mec(k, c, classes),
                ctx.topology.capacity_rc(host),
                rc,
            );
            match class {
                ServiceClass::Inelastic { d_th } => out.sla_inelastic_delay += rc.kappa_d * 0.0f64.max(d - d_th),
                ServiceClass::Elastic => out.elastic_delay += d,
            }
        }

        let dx = x - f64::from(prev.du_flavor);
        let dy = y - f64::from(prev.cu_flavor);
        let mut grow = dx.max(0.0) + dy.max(0.0);
        let mut change = dx.abs() + dy.abs();
        let mut migrated = 0.0;
        for c in 0..classes {
            let z = f64::from(a.mec_flavor[c]);
            let dz = z - f64::from(prev.mec_flavor[c]);
            grow += dz.max(0.0);
            change += dz.abs();
            if a.mec_at_cu[c] != prev.mec_at_cu[c] {
                migrated += z;
            }
        }
        out.instantiation += rc.kappa_i * grow;
        out.reconfig_flavor += rc.kappa_r * change;
        out.reconfig_mec_migration += rc.kappa_r * migrated;
        let mut moved = 0.0;
        if a.du_server != prev.du_server {
            moved += du_side;
        }
        if a.cu_server != prev.cu_server {
            moved += cu_side;
        }
        out.reconfig_server_migration += rc.kappa_r * moved;

        let loads = a.split.segment_loads_with(ctx.catalog, demands.legacy(k))?;
        // DU and CU on one server: the midhaul is internal
        let midhaul = if a.du_server == a.cu_server { 0.0 } else { loads.midhaul };
        out.routing += rc.kappa_h * (loads.fronthaul + midhaul + loads.backhaul);
    }

    for (server, load) in server_load {
        out.sla_server_capacity += rc.kappa_d * 0.0f64.max(load - ctx.topology.capacity_rc(server));
    }
    out.finish(rc);
    Ok(out)
}
