//! The single-BS toy world: EPC 0, DU servers 1 and 2, CU server 3, RU 4,
//! flavors 0..=3, one inelastic and one elastic MEC class.

use std::sync::Arc;

use oranmec_core::agents::{AgentConfig, Mode};
use oranmec_core::env::{EnvConfig, Environment};
use oranmec_core::topology::{Link, Node, NodeKind, Topology, TopologyConfig};
use oranmec_core::workload::{constant_demands, DemandSlot, ServiceClass, UtilizationModel};

pub fn topology() -> Arc<Topology> {
    let l = |src, dst, delay_ms| Link { src, dst, capacity_gbps: 100.0, delay_ms, weight: 0.01 };
    let cfg = TopologyConfig {
        nodes: vec![
            Node { id: 0, kind: NodeKind::Epc },
            Node { id: 1, kind: NodeKind::DuServer },
            Node { id: 2, kind: NodeKind::DuServer },
            Node { id: 3, kind: NodeKind::CuServer },
            Node { id: 4, kind: NodeKind::Ru },
        ],
        links: vec![l(4, 1, 0.05), l(4, 2, 0.4), l(1, 3, 0.1), l(2, 3, 0.1), l(3, 0, 0.05)],
        ..Default::default()
    };
    Arc::new(Topology::build(&cfg).unwrap())
}

pub fn env_config() -> EnvConfig {
    EnvConfig {
        num_bs: 1,
        classes: ServiceClass::default_pair(),
        bbu_flavors: vec![0, 1, 2, 3],
        mec_flavors: vec![0, 1, 2, 3],
        utilization: UtilizationModel::platform_a(2),
        ..EnvConfig::default()
    }
}

pub fn env(seed: u64) -> Environment {
    Environment::new(topology(), env_config(), seed).unwrap()
}

pub fn demands(horizon: usize) -> Vec<DemandSlot> {
    constant_demands(horizon, &[vec![1.0, 0.5, 0.5]]).unwrap()
}

/// Small, fast agent settings for the toy world.
pub fn agent_config(mode: Mode, seed: u64) -> AgentConfig {
    AgentConfig {
        mode,
        batch_size: 32,
        buffer_capacity: 100_000,
        lr: 1e-3,
        gamma: 0.5,
        t_p: 144,
        t_g: 144,
        t_s: 16,
        sigma_eps: 0.1,
        hidden: vec![64, 64, 64],
        feature_width: 32,
        reward_scale: 0.05,
        reward_clip: Some(1.0),
        seed,
        ..AgentConfig::default()
    }
}
