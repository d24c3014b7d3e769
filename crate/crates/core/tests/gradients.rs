//! Analytic backward pass against central finite differences.

mod support;

use oranmec_core::neural::{BranchingQNet, HeadMode, NetConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::finite_diff::relative_error;

#[test]
fn twenty_random_nets_match_finite_differences() {
    for seed in 0..20 {
        let err = relative_error(seed);
        assert!(err < 1e-4, "seed {seed}: relative error {err:e}");
    }
}

#[test]
fn single_linear_layer_hand_case() {
    // one trunk unit with w = 1 on input 2, one feature unit with weight 1,
    // linear head weight 1: output 2; squared loss against 0 gives
    // dL/dw_trunk = 2 * 2 * 2 = 8
    let cfg = NetConfig { input: 1, trunk: vec![1], feature_width: 1, branch_sizes: vec![1], mode: HeadMode::Linear };
    let mut net = BranchingQNet::zeroed(cfg).unwrap();
    // layout: trunk w, trunk b, feature w, feature b, head w, head b
    net.params_mut().copy_from_slice(&[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
    let out = net.forward_train(&[2.0]).unwrap();
    assert_eq!(out.data, vec![2.0]);
    let mut g = out.zeros_like();
    g.data[0] = 2.0 * (out.data[0] - 0.0);
    let grads = net.backward(&g).unwrap();
    assert_eq!(grads[0], 8.0);
    let zero = net.backward(&out.zeros_like()).unwrap();
    assert!(zero.iter().all(|&v| v == 0.0));
}

#[test]
fn branch_gradients_reach_the_trunk() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = NetConfig { input: 3, trunk: vec![5, 5], feature_width: 3, branch_sizes: vec![2, 2], mode: HeadMode::Linear };
    let mut net = BranchingQNet::new(cfg, &mut rng).unwrap();
    let out = net.forward_train(&[0.3, -0.2, 0.9]).unwrap();
    let mut g = out.zeros_like();
    // error only on branch 1
    g.branch_mut(0, 1)[0] = 1.0;
    let grads = net.backward(&g).unwrap();
    assert!(grads[..3 * 5].iter().any(|&v| v != 0.0));
}
