//! Analytic backward pass against central finite differences.

use oranmec_core::neural::{BranchOutputs, BranchingQNet, HeadMode, NetConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Scalar test loss: a fixed random linear functional of the outputs plus
/// half their squared norm, so every output carries gradient.
fn loss(net: &BranchingQNet, x: &[f64], coef: &[f64]) -> f64 {
    let out = net.forward(x).unwrap();
    out.data.iter().zip(coef).map(|(o, c)| c * o + 0.5 * o * o).sum()
}

fn loss_grad(out: &BranchOutputs, coef: &[f64]) -> BranchOutputs {
    let mut g = out.zeros_like();
    for ((g, o), c) in g.data.iter_mut().zip(&out.data).zip(coef) {
        *g = c + o;
    }
    g
}

fn random_config(rng: &mut ChaCha8Rng) -> NetConfig {
    let depth = rng.random_range(1..=3);
    NetConfig {
        input: rng.random_range(1..=6),
        trunk: (0..depth).map(|_| rng.random_range(2..=7)).collect(),
        feature_width: rng.random_range(1..=5),
        branch_sizes: (0..rng.random_range(1..=4)).map(|_| rng.random_range(1..=4)).collect(),
        mode: if rng.random_bool(0.5) { HeadMode::Linear } else { HeadMode::Features },
    }
}

/// Norm-wise relative error of analytic vs numeric gradients of one net.
pub fn relative_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = random_config(&mut rng);
    let mut net = BranchingQNet::new(cfg.clone(), &mut rng).unwrap();
    // biases away from zero keep ReLUs off their kink
    let batch = rng.random_range(1..=4);
    let x: Vec<f64> = (0..batch * cfg.input).map(|_| rng.random_range(-1.0..1.0)).collect();
    let out = net.forward_train(&x).unwrap();
    let coef: Vec<f64> = (0..out.data.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let analytic = net.backward(&loss_grad(&out, &coef)).unwrap();
    let h = 1e-5;
    let mut numeric = vec![0.0; net.num_params()];
    for i in 0..net.num_params() {
        let orig = net.params()[i];
        net.params_mut()[i] = orig + h;
        let up = loss(&net, &x, &coef);
        net.params_mut()[i] = orig - h;
        let down = loss(&net, &x, &coef);
        net.params_mut()[i] = orig;
        numeric[i] = (up - down) / (2.0 * h);
    }
    let diff: f64 = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt() + numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}
