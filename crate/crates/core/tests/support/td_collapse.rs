//! With one base station and one branch the branching target must be the
//! plain double DQN target `r + gamma * Qt(s', argmax_a Q(s', a))`.

use oranmec_core::agents::{td_target_bddqn, Batch};
use oranmec_core::neural::{BranchingQNet, HeadMode, NetConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Double DQN target written out directly, one row at a time.
fn ddqn_target(q_next: &[f64], qt_next: &[f64], reward: f64, gamma: f64, terminal: bool) -> f64 {
    if terminal {
        return reward;
    }
    let mut best = 0;
    for a in 1..q_next.len() {
        if q_next[a] > q_next[best] {
            best = a;
        }
    }
    reward + gamma * qt_next[best]
}

/// Number of rows, out of `cases` random ones, whose branching target
/// differs in any bit from the double DQN target.
pub fn mismatches(cases: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    let mut done = 0;
    while done < cases {
        let actions = rng.random_range(2..=6);
        let cfg = NetConfig { input: 4, trunk: vec![8, 8], feature_width: 4, branch_sizes: vec![actions], mode: HeadMode::Linear };
        let online = BranchingQNet::new(cfg.clone(), &mut rng).unwrap();
        let target = BranchingQNet::new(cfg, &mut rng).unwrap();
        let gamma = rng.random_range(0.0..=1.0);
        let rows = 50.min(cases - done);
        let mut batch = Batch::default();
        for _ in 0..rows {
            batch.states.extend((0..4).map(|_| rng.random_range(-1.0..1.0)));
            batch.actions.push(rng.random_range(0..actions));
            batch.rewards.push(rng.random_range(-100.0..10.0));
            batch.next_states.extend((0..4).map(|_| rng.random_range(-1.0..1.0)));
            batch.terminals.push(rng.random_bool(0.1));
        }
        let got = td_target_bddqn(&batch, &online, &target, gamma).unwrap();
        let q = online.forward(&batch.next_states).unwrap().data;
        let qt = target.forward(&batch.next_states).unwrap().data;
        for r in 0..rows {
            let row = r * actions..(r + 1) * actions;
            let want = ddqn_target(&q[row.clone()], &qt[row], batch.rewards[r], gamma, batch.terminals[r]);
            if got[r].to_bits() != want.to_bits() {
                bad += 1;
            }
        }
        done += rows;
    }
    bad
}
