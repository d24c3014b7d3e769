//! Cost scenarios evaluated by hand. Every expected item below was worked
//! out by hand from the cost definitions; the comments show the arithmetic.
//!
//! Unless a case says otherwise the world is:
//! EPC 0, DU servers 1 and 2 (20 RC), CU server 3 (100 RC), RUs 4 and 5,
//! all processing rates 1. Every link has weight 1, so routes are the
//! fewest-hop ones. Link delays (ms): 4-1 0.125, 4-2 0.5, 5-1 0.125,
//! 5-2 0.5, 1-3 0.25, 2-3 0.5, 3-0 0.5.
//! Prices: kappa_DM 0.25, kappa_CM 0.125, kappa_D 5, kappa_I = kappa_R =
//! 0.05, kappa_H 1, eta = b = delta1 = delta2 = 1, max delay 1000.

use std::sync::Arc;

use oranmec_core::env::{evaluate, mec_delay, Action, BsAction, CostBreakdown, CostContext, RewardConfig, Utilization};
use oranmec_core::splits::{Split, SplitCatalog};
use oranmec_core::topology::{Link, Node, NodeKind, Topology, TopologyConfig};
use oranmec_core::workload::{DemandSlot, ServiceClass};

pub struct Case {
    pub name: &'static str,
    pub topology: Arc<Topology>,
    pub classes: Vec<ServiceClass>,
    pub reward: RewardConfig,
    /// Per BS: legacy then MEC demands.
    pub demands: Vec<Vec<f64>>,
    pub previous: Action,
    pub action: Action,
    pub util: Utilization,
    pub expected: CostBreakdown,
}

impl Case {
    pub fn evaluate(&self) -> CostBreakdown {
        let catalog = SplitCatalog::default();
        let ctx = CostContext { topology: &self.topology, classes: &self.classes, reward: &self.reward, catalog: &catalog };
        let demands = DemandSlot::from_rows(0, &self.demands).unwrap();
        evaluate(&ctx, &demands, &self.previous, &self.action, &self.util).unwrap()
    }

    /// Largest absolute difference over every item, totals and reward.
    pub fn max_error(&self) -> f64 {
        let got = items(&self.evaluate());
        let want = items(&self.expected);
        got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

pub fn items(c: &CostBreakdown) -> [f64; 14] {
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
}

fn topology(ru_to_du1_delay: f64) -> Arc<Topology> {
    let l = |src, dst, delay_ms| Link { src, dst, capacity_gbps: 200.0, delay_ms, weight: 1.0 };
    let cfg = TopologyConfig {
        nodes: vec![
            Node { id: 0, kind: NodeKind::Epc },
            Node { id: 1, kind: NodeKind::DuServer },
            Node { id: 2, kind: NodeKind::DuServer },
            Node { id: 3, kind: NodeKind::CuServer },
            Node { id: 4, kind: NodeKind::Ru },
            Node { id: 5, kind: NodeKind::Ru },
        ],
        links: vec![
            l(4, 1, ru_to_du1_delay),
            l(4, 2, 0.5),
            l(5, 1, 0.125),
            l(5, 2, 0.5),
            l(1, 3, 0.25),
            l(2, 3, 0.5),
            l(3, 0, 0.5),
        ],
        ..Default::default()
    };
    Arc::new(Topology::build(&cfg).unwrap())
}

#[allow(clippy::too_many_arguments)]
fn bs(split: Split, x: u32, y: u32, z: &[u32], du: u32, cu: u32, at_cu: &[bool]) -> BsAction {
    BsAction {
        split,
        du_flavor: x,
        cu_flavor: y,
        mec_flavor: z.to_vec(),
        du_server: du,
        cu_server: cu,
        mec_at_cu: at_cu.to_vec(),
    }
}

fn one(b: BsAction) -> Action {
    Action { bs: vec![b] }
}

fn util(du: &[f64], cu: &[f64], mec: &[f64]) -> Utilization {
    Utilization { du: du.to_vec(), cu: cu.to_vec(), mec: mec.to_vec() }
}

fn pair() -> Vec<ServiceClass> {
    vec![ServiceClass::Inelastic { d_th: 1.0 }, ServiceClass::Elastic]
}

/// Sets `total` and `reward` from the items, as the definitions require.
fn close(mut c: CostBreakdown, rc: &RewardConfig) -> CostBreakdown {
    c.total = c.compute_du_mec
        + c.compute_cu_mec
        + c.sla_underprovision
        + c.sla_server_capacity
        + c.sla_split_delay
        + c.sla_inelastic_delay
        + c.instantiation
        + c.reconfig_flavor
        + c.reconfig_mec_migration
        + c.reconfig_server_migration
        + c.routing;
    c.reward = -c.total - rc.eta * rc.delay_coef * c.elastic_delay;
    c
}

pub fn cases() -> Vec<Case> {
    let rc = RewardConfig::default();
    let topo = topology(0.125);
    let mut out = Vec::new();

    // Idle S1 BS, nothing allocated, nothing changed: only the constant
    // O7 fronthaul load is routed, 1 * 10.1.
    let a = one(bs(Split::S1, 0, 0, &[0, 0], 1, 3, &[false, false]));
    out.push(Case {
        name: "idle S1 pays only the fronthaul constant",
        topology: topo.clone(),
        classes: pair(),
        reward: rc,
        demands: vec![vec![0.0, 0.0, 0.0]],
        previous: a.clone(),
        action: a,
        util: util(&[0.0], &[0.0], &[0.0, 0.0]),
        expected: CostBreakdown { routing: 10.1, total: 10.1, reward: -10.1, ..Default::default() },
    });

    // Under-provisioning with one elastic class: x^ 3 vs x 2, y^ 1 vs y 2,
    // z^ 2 vs z 1 -> 5 * (max(0, 1, -1) + 1) = 10.
    // compute: 0.25 * (2 + 1) = 0.75 and 0.125 * 2 = 0.25.
    // elastic delay: no demand, (2 / 20)^2 = 0.01. Routing 10.1.
    let a = one(bs(Split::S1, 2, 2, &[1], 1, 3, &[false]));
    out.push(Case {
        name: "under-provisioning penalty equals 10",
        topology: topo.clone(),
        classes: vec![ServiceClass::Elastic],
        reward: rc,
        demands: vec![vec![0.0, 0.0]],
        previous: a.clone(),
        action: a,
        util: util(&[3.0], &[1.0], &[2.0]),
        expected: close(
            CostBreakdown {
                compute_du_mec: 0.75,
                compute_cu_mec: 0.25,
                sla_underprovision: 10.0,
                routing: 10.1,
                elastic_delay: 0.01,
                ..Default::default()
            },
            &rc,
        ),
    });

    // MEC delay: 1 Gbps over a 0.001 ms fronthaul, rate 1, z 2, z^ 1 on a
    // 20 RC host -> 1 * 0.001 + 1 * 1 / 2 + (1 / 20)^2 = 0.5035.
    // compute: 0.25 * 2 = 0.5. Routing 10.1.
    let a = one(bs(Split::S1, 0, 0, &[2], 1, 3, &[false]));
    out.push(Case {
        name: "elastic MEC delay equals 0.5035",
        topology: topology(0.001),
        classes: vec![ServiceClass::Elastic],
        reward: rc,
        demands: vec![vec![0.0, 1.0]],
        previous: a.clone(),
        action: a,
        util: util(&[0.0], &[0.0], &[1.0]),
        expected: close(
            CostBreakdown { compute_du_mec: 0.5, routing: 10.1, elastic_delay: 0.5035, ..Default::default() },
            &rc,
        ),
    });

    // Server capacity: DU server 1 hosts x 3 plus MEC 15 + 10 = 28 RC on
    // 20 -> 5 * 8 = 40. Compute 0.25 * 28 = 7.
    let a = one(bs(Split::S1, 3, 0, &[15, 10], 1, 3, &[false, false]));
    out.push(Case {
        name: "server capacity overflow",
        topology: topo.clone(),
        classes: pair(),
        reward: rc,
        demands: vec![vec![0.0, 0.0, 0.0]],
        previous: a.clone(),
        action: a,
        util: util(&[0.0], &[0.0], &[0.0, 0.0]),
        expected: close(
            CostBreakdown { compute_du_mec: 7.0, sla_server_capacity: 40.0, routing: 10.1, ..Default::default() },
            &rc,
        ),
    });

    // Split deadline: S1 on DU server 2 has a 0.5 ms fronthaul against the
    // 0.25 ms O7 deadline -> 5 * 0.25 = 1.25; the 0.5 ms midhaul meets the
    // 10 ms O2 deadline. Routing for 2 Gbps: 10.1 + 2 + 2 = 14.1.
    // Compute 0.25 + 0.125.
    let a = one(bs(Split::S1, 1, 1, &[0, 0], 2, 3, &[false, false]));
    out.push(Case {
        name: "fronthaul deadline violation",
        topology: topo.clone(),
        classes: pair(),
        reward: rc,
        demands: vec![vec![2.0, 0.0, 0.0]],
        previous: a.clone(),
        action: a,
        util: util(&[0.5], &[0.5], &[0.0, 0.0]),
        expected: close(
            CostBreakdown {
                compute_du_mec: 0.25,
                compute_cu_mec: 0.125,
                sla_split_delay: 1.25,
                routing: 14.1,
                ..Default::default()
            },
            &rc,
        ),
    });

    // S4 at 1 Gbps: O8 fronthaul 157.3, user plane 1 on the midhaul and 1
    // on the backhaul -> 159.3. Compute 0.25 * 2 = 0.5.
    let a = one(bs(Split::S4, 2, 0, &[0, 0], 1, 3, &[false, false]));
    out.push(Case {
        name: "S4 routes the O8 fronthaul",
        topology: topo.clone(),
        classes: pair(),
        reward: rc,
        demands: vec![vec![1.0, 0.0, 0.0]],
        previous: a.clone(),
        action: a,
        util: util(&[2.0], &[0.0], &[0.0, 0.0]),
        expected: close(CostBreakdown { compute_du_mec: 0.5, routing: 159.3, ..Default::default() }, &rc),
    });

    // Inelastic class at the CU: path 0.125 + 0.25 = 0.375, 2 Gbps, z 1,
    // z^ 1 on 100 RC -> 0.75 + 2 + 0.0001 = 2.7501, late by 1.7501 ->
    // 8.7505. Elastic at the DU: 1 Gbps, z 4, z^ 0.5 on 20 RC ->
    // 0.125 + 0.25 + 0.000625 = 0.375625.
    // Compute: 0.25 * (1 + 4) = 1.25 and 0.125 * (1 + 1) = 0.25.
    let a = one(bs(Split::S1, 1, 1, &[1, 4], 1, 3, &[true, false]));
    out.push(Case {
        name: "inelastic deadline violation at the CU",
        topology: topo.clone(),
        classes: pair(),
        reward: rc,
        demands: vec![vec![0.0, 2.0, 1.0]],
        previous: a.clone(),
        action: a,
        util: util(&[1.0], &[1.0], &[1.0, 0.5]),
        expected: close(
            CostBreakdown {
                compute_du_mec: 1.25,
                compute_cu_mec: 0.25,
                sla_inelastic_delay: 8.7505,
                routing: 10.1,
                elastic_delay: 0.375625,
                ..Default::default()
            },
            &rc,
        ),
    });

    // Flavor changes in place: x 1 -> 3, y 1 -> 0, z (1, 1) -> (2, 1).
    // Growth 2 + 0 + 1 = 3 -> 0.15; total change 2 + 1 + 1 = 4 -> 0.2.
    // Compute 0.25 * (3 + 2 + 1) = 1.5.
    out.push(Case {
        name: "instantiation and flavor reconfiguration",
        topology: topo.clone(),
        classes: pair(),
        reward: rc,
        demands: vec![vec![0.0, 0.0, 0.0]],
        previous: one(bs(Split::S1, 1, 1, &[1, 1], 1, 3, &[false, false])),
        action: one(bs(Split::S1, 3, 0, &[2, 1], 1, 3, &[false, false])),
        util: util(&[0.0], &[0.0], &[0.0, 0.0]),
        expected: close(
            CostBreakdown {
                compute_du_mec: 1.5,
                instantiation: 0.15,
                reconfig_flavor: 0.2,
                routing: 10.1,
                ..Default::default()
            },
            &rc,
        ),
    });

    // Migrations: MEC class 0 (z 2) moves to the CU -> 0.05 * 2 = 0.1; the
    // DU moves from server 1 to 2 carrying x 2 plus the DU-hosted z 3 ->
    // 0.05 * 5 = 0.25. The new fronthaul (0.5 ms) is late by 0.25 -> 1.25.
    // Compute: 0.25 * (2 + 3) = 1.25 and 0.125 * (1 + 2) = 0.375.
    out.push(Case {
        name: "MEC and DU migrations",
        topology: topo.clone(),
        classes: pair(),
        reward: rc,
        demands: vec![vec![0.0, 0.0, 0.0]],
        previous: one(bs(Split::S1, 2, 1, &[2, 3], 1, 3, &[false, false])),
        action: one(bs(Split::S1, 2, 1, &[2, 3], 2, 3, &[true, false])),
        util: util(&[0.0], &[0.0], &[0.0, 0.0]),
        expected: close(
            CostBreakdown {
                compute_du_mec: 1.25,
                compute_cu_mec: 0.375,
                sla_split_delay: 1.25,
                reconfig_mec_migration: 0.1,
                reconfig_server_migration: 0.25,
                routing: 10.1,
                ..Default::default()
            },
            &rc,
        ),
    });

    // Demand without resources: both classes get the 1000 delay; the
    // inelastic one is late by 999 -> 4995, the elastic one adds 1000 to D.
    // Compute 0.25 + 0.125.
    let a = one(bs(Split::S1, 1, 1, &[0, 0], 1, 3, &[false, false]));
    out.push(Case {
        name: "unserved MEC demand takes the maximum delay",
        topology: topo.clone(),
        classes: pair(),
        reward: rc,
        demands: vec![vec![0.0, 0.5, 0.5]],
        previous: a.clone(),
        action: a,
        util: util(&[0.0], &[0.0], &[0.0, 0.0]),
        expected: close(
            CostBreakdown {
                compute_du_mec: 0.25,
                compute_cu_mec: 0.125,
                sla_inelastic_delay: 4995.0,
                routing: 10.1,
                elastic_delay: 1000.0,
                ..Default::default()
            },
            &rc,
        ),
    });

    // S3 at 2 Gbps with kappa_H 2, eta 0.5, b 10: routing 2 * (10.1 +
    // (1.02 * 2 + 0.5) + 2) = 29.28. Elastic at the DU: 1 Gbps, z 2, z^ 1
    // -> 0.125 + 0.5 + 0.0025 = 0.6275, weighted 0.5 * 10 = 5 in the reward.
    // Compute 0.25 * (1 + 2) = 0.75 and 0.125.
    let rc_b = RewardConfig { kappa_h: 2.0, eta: 0.5, delay_coef: 10.0, ..rc };
    let a = one(bs(Split::S3, 1, 1, &[0, 2], 1, 3, &[false, false]));
    out.push(Case {
        name: "S3 routing with custom weights",
        topology: topo.clone(),
        classes: pair(),
        reward: rc_b,
        demands: vec![vec![2.0, 0.0, 1.0]],
        previous: a.clone(),
        action: a,
        util: util(&[1.0], &[1.0], &[0.0, 1.0]),
        expected: close(
            CostBreakdown {
                compute_du_mec: 0.75,
                compute_cu_mec: 0.125,
                routing: 29.28,
                elastic_delay: 0.6275,
                ..Default::default()
            },
            &rc_b,
        ),
    });

    // Two BSs sharing DU server 1: 12 + 9 = 21 RC on 20 -> 5. Compute
    // 0.25 * 21 = 5.25. Two idle fronthauls: 20.2.
    let a = Action {
        bs: vec![
            bs(Split::S1, 12, 0, &[0, 0], 1, 3, &[false, false]),
            bs(Split::S1, 9, 0, &[0, 0], 1, 3, &[false, false]),
        ],
    };
    out.push(Case {
        name: "two BSs overflow a shared DU server",
        topology: topo,
        classes: pair(),
        reward: rc,
        demands: vec![vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]],
        previous: a.clone(),
        action: a,
        util: util(&[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0, 0.0, 0.0]),
        expected: close(
            CostBreakdown { compute_du_mec: 5.25, sla_server_capacity: 5.0, routing: 20.2, ..Default::default() },
            &rc,
        ),
    });

    out
}

/// The delay model alone on the worked example: 0.001 + 0.5 + 0.0025.
pub fn delay_example() -> f64 {
    mec_delay(1.0, 0.001, 1.0, 2.0, 1.0, 20.0, &RewardConfig::default())
}
