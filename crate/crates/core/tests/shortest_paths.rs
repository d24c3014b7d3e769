//! Precomputed routes against brute-force enumeration of simple paths on
//! random 10-node graphs.

use std::cmp::Ordering;

use oranmec_core::topology::{Link, Node, NodeId, NodeKind, Topology, TopologyConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// EPC 0, DU servers 1 and 2, CU servers 3 and 4, RUs 5 and 6, routers
/// 7..=9; a random spanning chain keeps it connected, extra random links
/// follow. Integer weights on some graphs force ties.
fn random_graph(seed: u64) -> TopologyConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = [
        NodeKind::Epc,
        NodeKind::DuServer,
        NodeKind::DuServer,
        NodeKind::CuServer,
        NodeKind::CuServer,
        NodeKind::Ru,
        NodeKind::Ru,
        NodeKind::Router,
        NodeKind::Router,
        NodeKind::Router,
    ];
    let nodes: Vec<Node> = kinds.iter().enumerate().map(|(i, &kind)| Node { id: i as NodeId, kind }).collect();
    let integer = seed % 2 == 0;
    let weight = |rng: &mut ChaCha8Rng| if integer { rng.random_range(1..=3) as f64 } else { rng.random_range(0.01..1.0) };
    let mut order: Vec<NodeId> = (0..10).collect();
    for i in (1..10).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut pairs = std::collections::BTreeSet::new();
    for w in order.windows(2) {
        pairs.insert((w[0].min(w[1]), w[0].max(w[1])));
    }
    for _ in 0..rng.random_range(3..12) {
        let a = rng.random_range(0..10);
        let b = rng.random_range(0..10);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    let links = pairs
        .into_iter()
        .map(|(src, dst)| Link { src, dst, capacity_gbps: 10.0, delay_ms: rng.random_range(0.0..0.2), weight: weight(&mut rng) })
        .collect();
    TopologyConfig { nodes, links, ..Default::default() }
}

struct Best {
    weight: f64,
    delay: f64,
    nodes: Vec<NodeId>,
    links: Vec<usize>,
}

fn order(w: f64, nodes: &[NodeId], links: &[usize], best: &Best) -> Ordering {
    w.total_cmp(&best.weight).then_with(|| nodes.cmp(&best.nodes)).then_with(|| links.cmp(&best.links))
}

/// Minimum-weight simple path, ties to the smallest node then link sequence.
fn brute_force(cfg: &TopologyConfig, src: NodeId, dst: NodeId) -> Best {
    fn dfs(cfg: &TopologyConfig, dst: NodeId, nodes: &mut Vec<NodeId>, links: &mut Vec<usize>, w: f64, d: f64, best: &mut Best) {
        let u = *nodes.last().unwrap();
        if u == dst {
            if order(w, nodes, links, best) == Ordering::Less {
                *best = Best { weight: w, delay: d, nodes: nodes.clone(), links: links.clone() };
            }
            return;
        }
        for (i, l) in cfg.links.iter().enumerate() {
            let v = if l.src == u {
                l.dst
            } else if l.dst == u {
                l.src
            } else {
                continue;
            };
            if nodes.contains(&v) {
                continue;
            }
            nodes.push(v);
            links.push(i);
            dfs(cfg, dst, nodes, links, w + l.weight, d + l.delay_ms, best);
            nodes.pop();
            links.pop();
        }
    }
    let mut best = Best { weight: f64::INFINITY, delay: 0.0, nodes: Vec::new(), links: Vec::new() };
    dfs(cfg, dst, &mut vec![src], &mut Vec::new(), 0.0, 0.0, &mut best);
    best
}

#[test]
fn routes_match_brute_force() {
    for seed in 0..40 {
        let cfg = random_graph(seed);
        let topo = Topology::build(&cfg).unwrap();
        for (k, &ru) in topo.rus().iter().enumerate() {
            for &du in topo.du_servers() {
                for &cu in topo.cu_servers() {
                    let got = topo.shortest_paths(k, du, cu).unwrap();
                    for (path, src, dst) in [(got.fronthaul, ru, du), (got.midhaul, du, cu), (got.backhaul, cu, 0)] {
                        let want = brute_force(&cfg, src, dst);
                        assert_eq!(path.nodes, want.nodes, "seed {seed}: {src} -> {dst}");
                        assert_eq!(path.links, want.links);
                        assert_eq!(path.weight, want.weight);
                        assert_eq!(path.delay_ms, want.delay);
                    }
                }
            }
        }
    }
}
