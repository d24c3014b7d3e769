//! Exhaustive stationary oracle on small action spaces.

mod support;

use oranmec_core::agents::{Agent, Mode};
use oranmec_core::env::{EnvConfig, Environment};
use oranmec_core::oracle::{evaluate_stationary, stationary_oracle, ORACLE_LIMIT};
use oranmec_core::splits::Split;
use oranmec_core::topology::{Topology, TopologyConfig};
use oranmec_core::workload::{constant_demands, ServiceClass};
use oranmec_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::sync::Arc;

fn mean_reward(env: &mut Environment, demands: &[oranmec_core::workload::DemandSlot], a: &oranmec_core::env::Action) -> f64 {
    let c = evaluate_stationary(env, demands, a).unwrap();
    c.iter().map(|c| c.reward).sum::<f64>() / c.len() as f64
}

#[test]
fn zero_demand_picks_zero_flavors_and_a_cheap_split() {
    // without a utilization floor, idle compute is pure cost
    let mut cfg = support::toy::env_config();
    cfg.utilization.bbu_base = 0.0;
    cfg.utilization.mec_base = vec![0.0; 2];
    let mut env = Environment::new(support::toy::topology(), cfg, 0).unwrap();
    let demands = constant_demands(4, &[vec![0.0; 3]]).unwrap();
    let best = stationary_oracle(&mut env, &demands).unwrap();
    let b = &best.action.bs[0];
    assert_ne!(b.split, Split::S4);
    assert_eq!(b.split, Split::S1, "S1 and S2 tie; the first enumerated wins");
    assert_eq!((b.du_flavor, b.cu_flavor), (0, 0));
    assert_eq!(b.mec_flavor, vec![0, 0]);
    // DU server 2's fronthaul misses the O7 deadline
    assert_eq!(b.du_server, 1);
    // four slots of the 10.1 fronthaul, plus one-off shrinking of four
    // 1-RC flavors at 0.05 each
    assert!((best.mean_reward - (-(4.0 * 10.1 + 0.2) / 4.0)).abs() < 1e-12, "{}", best.mean_reward);
}

#[test]
fn enumerates_the_432_action_space() {
    let cfg = EnvConfig {
        classes: vec![ServiceClass::Elastic],
        bbu_flavors: vec![0, 1, 2],
        mec_flavors: vec![0, 1, 2],
        utilization: oranmec_core::workload::UtilizationModel::platform_a(1),
        ..support::toy::env_config()
    };
    let mut env = Environment::new(support::toy::topology(), cfg, 0).unwrap();
    assert_eq!(env.space().cardinality(), 432);
    let all: HashSet<_> = env.space().enumerate(ORACLE_LIMIT).unwrap().collect();
    assert_eq!(all.len(), 432);
    let demands = constant_demands(3, &[vec![1.0, 0.5]]).unwrap();
    let best = stationary_oracle(&mut env, &demands).unwrap();
    assert_eq!(best.evaluated, 432);
    let again = stationary_oracle(&mut env, &demands).unwrap();
    assert_eq!(best.action, again.action);
    assert_eq!(best.mean_reward.to_bits(), again.mean_reward.to_bits());
    assert_eq!(best.per_slot, again.per_slot);
}

#[test]
fn refuses_the_full_space() {
    let topo = Arc::new(Topology::build(&TopologyConfig::default_cluster(1)).unwrap());
    let cfg = EnvConfig { num_bs: 1, ..EnvConfig::default() };
    let mut env = Environment::new(topo, cfg, 0).unwrap();
    let demands = constant_demands(2, &[vec![1.0, 0.5, 0.5]]).unwrap();
    let err = stationary_oracle(&mut env, &demands).unwrap_err();
    assert_eq!(err, Error::OracleTooLarge { cardinality: 8_388_608, limit: ORACLE_LIMIT });
}

#[test]
fn oracle_bounds_random_and_learned_stationary_policies() {
    let mut env = support::toy::env(0);
    let demands = support::toy::demands(24);
    let best = stationary_oracle(&mut env, &demands).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sizes = env.space().branch_sizes();
    for _ in 0..200 {
        let idx: Vec<usize> = sizes.iter().map(|&n| rng.random_range(0..n)).collect();
        let a = env.space().decode(&idx).unwrap();
        assert!(mean_reward(&mut env, &demands, &a) <= best.mean_reward);
    }
    let mut agent = Agent::new(env.space().clone(), support::toy::agent_config(Mode::Bayes, 1)).unwrap();
    for _ in 0..3 {
        agent.train_episode(&mut env, demands.clone(), |_| {}).unwrap();
    }
    let (_, actions) = agent.evaluate_greedy(&mut env, demands.clone()).unwrap();
    let last = actions.last().unwrap();
    assert!(mean_reward(&mut env, &demands, last) <= best.mean_reward);
}
