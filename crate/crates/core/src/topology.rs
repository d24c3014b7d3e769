//! Static network graph: radio units, DU/CU servers, routers and the EPC,
//! plus the fronthaul/midhaul/backhaul routes precomputed for every
//! (RU, DU server, CU server) combination.
//!
//! Routing minimizes the summed link *weight*; delay constraints use the
//! summed link *delay* of the chosen route. Ties between equal-weight routes
//! are broken by the lexicographically smallest node-id sequence, then by the
//! link-index sequence (parallel links).

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Ru,
    DuServer,
    CuServer,
    Router,
    Epc,
}

impl NodeKind {
    pub fn is_server(self) -> bool {
        matches!(self, NodeKind::DuServer | NodeKind::CuServer)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
}

/// Undirected link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub src: NodeId,
    pub dst: NodeId,
    pub capacity_gbps: f64,
    pub delay_ms: f64,
    pub weight: f64,
}

/// Waxman random-graph parameters. `alpha` is the link probability scale and
/// `beta` the edge-length control: an edge (u, v) exists with probability
/// `alpha * exp(-dist(u, v) / (beta * L))`, `L` being the largest distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaxmanParams {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    /// Join disconnected components through their closest node pairs instead
    /// of failing construction.
    #[serde(default)]
    pub repair: bool,
}

impl WaxmanParams {
    pub fn new(n: usize, seed: u64) -> Self {
        Self { n, alpha: 0.5, beta: 0.1, seed, repair: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TopologyConfig {
    #[serde(default)]
    pub nodes: Vec<Node>,
    #[serde(default)]
    pub links: Vec<Link>,
    #[serde(default)]
    pub du_servers: Vec<NodeId>,
    #[serde(default)]
    pub cu_servers: Vec<NodeId>,
    #[serde(default)]
    pub mec_servers: Vec<NodeId>,
    /// Server processing capacity P_l in reference cores.
    #[serde(default)]
    pub capacity_rc: BTreeMap<NodeId, f64>,
    /// MEC processing rate rho_l; servers not listed default to 1.
    #[serde(default)]
    pub rate: BTreeMap<NodeId, f64>,
    #[serde(default)]
    pub waxman: Option<WaxmanParams>,
}

pub const DU_CAPACITY_RC: f64 = 20.0;
pub const CU_CAPACITY_RC: f64 = 100.0;

const LINK_DELAY_MS: (f64, f64) = (0.0, 0.1);
const LINK_CAPACITY_GBPS: (f64, f64) = (30.0, 160.0);
const LINK_WEIGHT: (f64, f64) = (0.0, 0.1);

impl TopologyConfig {
    /// One cluster: EPC (id 0), DU servers 1..=4, CU servers 5..=6 and RUs
    /// 7..=10. RU i reaches DU servers i and i+1 (mod 4), every DU server
    /// reaches both CU servers and both CU servers reach the EPC. Link
    /// attributes are drawn from the seeded stream.
    pub fn default_cluster(seed: u64) -> Self {
        let mut nodes = vec![Node { id: 0, kind: NodeKind::Epc }];
        nodes.extend((1..=4).map(|id| Node { id, kind: NodeKind::DuServer }));
        nodes.extend((5..=6).map(|id| Node { id, kind: NodeKind::CuServer }));
        nodes.extend((7..=10).map(|id| Node { id, kind: NodeKind::Ru }));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut links = Vec::new();
        for i in 0..4u32 {
            links.push(random_link(&mut rng, 7 + i, 1 + i));
            links.push(random_link(&mut rng, 7 + i, 1 + (i + 1) % 4));
        }
        for du in 1..=4 {
            for cu in 5..=6 {
                links.push(random_link(&mut rng, du, cu));
            }
        }
        for cu in 5..=6 {
            links.push(random_link(&mut rng, cu, 0));
        }
        let mut cfg = Self { nodes, links, ..Self::default() };
        cfg.fill_default_servers();
        cfg
    }

    /// Waxman topology with the default role layout: EPC at 0, four DU
    /// servers, two CU servers, four RUs, and routers for the remainder.
    pub fn waxman(params: WaxmanParams) -> Self {
        Self { waxman: Some(params), ..Self::default() }
    }

    fn fill_default_servers(&mut self) {
        let by_kind = |kind| -> Vec<NodeId> {
            self.nodes.iter().filter(|n| n.kind == kind).map(|n| n.id).collect()
        };
        if self.du_servers.is_empty() {
            self.du_servers = by_kind(NodeKind::DuServer);
        }
        if self.cu_servers.is_empty() {
            self.cu_servers = by_kind(NodeKind::CuServer);
        }
        if self.mec_servers.is_empty() {
            let mut all: BTreeSet<NodeId> = self.du_servers.iter().copied().collect();
            all.extend(self.cu_servers.iter().copied());
            self.mec_servers = all.into_iter().collect();
        }
        if self.capacity_rc.is_empty() {
            for &s in &self.du_servers {
                self.capacity_rc.insert(s, DU_CAPACITY_RC);
            }
            for &s in &self.cu_servers {
                self.capacity_rc.insert(s, CU_CAPACITY_RC);
            }
        }
    }
}

fn random_link(rng: &mut ChaCha8Rng, src: NodeId, dst: NodeId) -> Link {
    Link {
        src,
        dst,
        capacity_gbps: rng.random_range(LINK_CAPACITY_GBPS.0..=LINK_CAPACITY_GBPS.1),
        delay_ms: rng.random_range(LINK_DELAY_MS.0..=LINK_DELAY_MS.1),
        weight: rng.random_range(LINK_WEIGHT.0..=LINK_WEIGHT.1),
    }
}

fn default_layout(n: usize) -> Result<Vec<Node>> {
    if n < 11 {
        return Err(Error::Topology(format!(
            "waxman default layout needs at least 11 nodes, got {n}"
        )));
    }
    Ok((0..n as NodeId)
        .map(|id| {
            let kind = match id {
                0 => NodeKind::Epc,
                1..=4 => NodeKind::DuServer,
                5..=6 => NodeKind::CuServer,
                7..=10 => NodeKind::Ru,
                _ => NodeKind::Router,
            };
            Node { id, kind }
        })
        .collect())
}

fn waxman_links(params: &WaxmanParams) -> Vec<Link> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let pos: Vec<(f64, f64)> = (0..params.n)
        .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    let dist = |a: usize, b: usize| libm::hypot(pos[a].0 - pos[b].0, pos[a].1 - pos[b].1);
    let mut longest = 0.0f64;
    for i in 0..params.n {
        for j in i + 1..params.n {
            longest = longest.max(dist(i, j));
        }
    }
    let scale = params.beta * longest;
    let mut links = Vec::new();
    for i in 0..params.n {
        for j in i + 1..params.n {
            let p = if scale > 0.0 { params.alpha * libm::exp(-dist(i, j) / scale) } else { 0.0 };
            if rng.random::<f64>() < p {
                links.push(random_link(&mut rng, i as NodeId, j as NodeId));
            }
        }
    }
    if params.repair {
        // Kruskal-style joining of components through their closest pairs.
        let mut comp: Vec<usize> = (0..params.n).collect();
        fn find(comp: &mut [usize], mut x: usize) -> usize {
            while comp[x] != x {
                comp[x] = comp[comp[x]];
                x = comp[x];
            }
            x
        }
        for l in &links {
            let (a, b) = (find(&mut comp, l.src as usize), find(&mut comp, l.dst as usize));
            comp[a] = b;
        }
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for i in 0..params.n {
            for j in i + 1..params.n {
                pairs.push((dist(i, j), i, j));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        for (_, i, j) in pairs {
            let (a, b) = (find(&mut comp, i), find(&mut comp, j));
            if a != b {
                comp[a] = b;
                links.push(random_link(&mut rng, i as NodeId, j as NodeId));
            }
        }
    }
    links
}

/// A route as its node sequence and the links traversed.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub links: Vec<usize>,
    pub weight: f64,
    pub delay_ms: f64,
}

impl Path {
    fn trivial(node: NodeId) -> Self {
        Self { nodes: vec![node], links: Vec::new(), weight: 0.0, delay_ms: 0.0 }
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }
}

/// The three xHaul routes of one BS for a given DU/CU placement.
#[derive(Debug, Clone, Copy)]
pub struct PathEntry<'a> {
    pub fronthaul: &'a Path,
    pub midhaul: &'a Path,
    pub backhaul: &'a Path,
}

impl PathEntry<'_> {
    /// Route of a MEC flow: fronthaul only when hosted with the DU, fronthaul
    /// followed by midhaul when hosted with the CU.
    pub fn mec_path(&self, colocated_with_cu: bool) -> (Vec<usize>, f64) {
        if colocated_with_cu {
            let mut links = self.fronthaul.links.clone();
            links.extend_from_slice(&self.midhaul.links);
            (links, self.fronthaul.delay_ms + self.midhaul.delay_ms)
        } else {
            (self.fronthaul.links.clone(), self.fronthaul.delay_ms)
        }
    }

    pub fn mec_delay_ms(&self, colocated_with_cu: bool) -> f64 {
        if colocated_with_cu {
            self.fronthaul.delay_ms + self.midhaul.delay_ms
        } else {
            self.fronthaul.delay_ms
        }
    }
}

/// Precomputed routes, indexed by RU position, DU-server position and
/// CU-server position within their respective lists.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTable {
    fronthaul: Vec<Vec<Option<Path>>>,
    midhaul: Vec<Vec<Option<Path>>>,
    backhaul: Vec<Option<Path>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: Vec<Node>,
    links: Vec<Link>,
    adjacency: Vec<Vec<(NodeId, usize)>>,
    rus: Vec<NodeId>,
    du_servers: Vec<NodeId>,
    cu_servers: Vec<NodeId>,
    mec_servers: Vec<NodeId>,
    capacity_rc: BTreeMap<NodeId, f64>,
    rate: BTreeMap<NodeId, f64>,
    paths: PathTable,
}

impl Topology {
    pub fn build(config: &TopologyConfig) -> Result<Self> {
        let mut config = config.clone();
        if let Some(w) = config.waxman {
            if config.nodes.is_empty() {
                config.nodes = default_layout(w.n)?;
            } else if config.nodes.len() != w.n {
                return Err(Error::Topology(format!(
                    "waxman n = {} but {} nodes listed",
                    w.n,
                    config.nodes.len()
                )));
            }
            if config.links.is_empty() {
                config.links = waxman_links(&w);
            }
        }
        config.fill_default_servers();
        Self::validate(&config)?;

        let n = config.nodes.len();
        let mut adjacency = vec![Vec::new(); n];
        for (idx, l) in config.links.iter().enumerate() {
            adjacency[l.src as usize].push((l.dst, idx));
            adjacency[l.dst as usize].push((l.src, idx));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let rus: Vec<NodeId> =
            config.nodes.iter().filter(|n| n.kind == NodeKind::Ru).map(|n| n.id).collect();

        let mut topo = Self {
            nodes: config.nodes,
            links: config.links,
            adjacency,
            rus,
            du_servers: config.du_servers,
            cu_servers: config.cu_servers,
            mec_servers: config.mec_servers,
            capacity_rc: config.capacity_rc,
            rate: config.rate,
            paths: PathTable { fronthaul: Vec::new(), midhaul: Vec::new(), backhaul: Vec::new() },
        };

        let epc_tree = topo.dijkstra(0);
        for &ru in &topo.rus {
            if epc_tree[ru as usize].is_none() {
                return Err(Error::Topology(format!("RU {ru} cannot reach the EPC")));
            }
        }
        let fronthaul = topo
            .rus
            .iter()
            .map(|&ru| {
                let tree = topo.dijkstra(ru);
                topo.du_servers.iter().map(|&du| tree[du as usize].clone()).collect()
            })
            .collect();
        let midhaul = topo
            .du_servers
            .iter()
            .map(|&du| {
                let tree = topo.dijkstra(du);
                topo.cu_servers.iter().map(|&cu| tree[cu as usize].clone()).collect()
            })
            .collect();
        let backhaul = topo
            .cu_servers
            .iter()
            .map(|&cu| topo.dijkstra(cu)[0].clone())
            .collect();
        topo.paths = PathTable { fronthaul, midhaul, backhaul };
        Ok(topo)
    }

    fn validate(config: &TopologyConfig) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::Topology(msg));
        if config.nodes.is_empty() {
            return bad("no nodes".into());
        }
        for (pos, node) in config.nodes.iter().enumerate() {
            if node.id as usize != pos {
                return bad(format!("node ids must be 0..n in order; found {} at {pos}", node.id));
            }
        }
        let epcs = config.nodes.iter().filter(|n| n.kind == NodeKind::Epc).count();
        if epcs != 1 || config.nodes[0].kind != NodeKind::Epc {
            return bad("exactly one EPC is required and it must have id 0".into());
        }
        let n = config.nodes.len() as NodeId;
        for l in &config.links {
            if l.src >= n || l.dst >= n {
                return bad(format!("link {}-{} references an unknown node", l.src, l.dst));
            }
            if l.src == l.dst {
                return bad(format!("self-loop at node {}", l.src));
            }
            if !(l.capacity_gbps > 0.0) || !l.capacity_gbps.is_finite() {
                return bad(format!("link {}-{} capacity must be > 0", l.src, l.dst));
            }
            if !(l.delay_ms >= 0.0) || !l.delay_ms.is_finite() {
                return bad(format!("link {}-{} delay must be >= 0", l.src, l.dst));
            }
            if !(l.weight >= 0.0) || !l.weight.is_finite() {
                return bad(format!("link {}-{} weight must be >= 0", l.src, l.dst));
            }
        }
        if !config.nodes.iter().any(|n| n.kind == NodeKind::Ru) {
            return bad("no RU nodes".into());
        }
        for (name, set) in [("du_servers", &config.du_servers), ("cu_servers", &config.cu_servers)] {
            if set.is_empty() {
                return bad(format!("{name} is empty"));
            }
            let mut seen = BTreeSet::new();
            for &s in set.iter() {
                if s >= n || !config.nodes[s as usize].kind.is_server() {
                    return bad(format!("{name} entry {s} is not a server node"));
                }
                if !seen.insert(s) {
                    return bad(format!("{name} lists {s} twice"));
                }
            }
        }
        for &s in &config.mec_servers {
            if !config.du_servers.contains(&s) && !config.cu_servers.contains(&s) {
                return bad(format!("MEC server {s} is neither a DU nor a CU candidate"));
            }
        }
        for &s in config.du_servers.iter().chain(&config.cu_servers) {
            match config.capacity_rc.get(&s) {
                Some(&p) if p > 0.0 && p.is_finite() => {}
                Some(&p) => return bad(format!("server {s} capacity {p} must be > 0")),
                None => return bad(format!("server {s} has no capacity")),
            }
        }
        for (&s, &r) in &config.rate {
            if !(r > 0.0) || !r.is_finite() {
                return bad(format!("server {s} rate {r} must be > 0"));
            }
        }
        Ok(())
    }

    /// Minimum-weight routes from `src` to every node.
    fn dijkstra(&self, src: NodeId) -> Vec<Option<Path>> {
        #[derive(PartialEq)]
        struct Label(Path);
        impl Eq for Label {}
        impl Ord for Label {
            fn cmp(&self, other: &Self) -> Ordering {
                // reversed for a min-heap
                route_order(&other.0, &self.0)
            }
        }
        impl PartialOrd for Label {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        let n = self.nodes.len();
        let mut best: Vec<Option<Path>> = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        best[src as usize] = Some(Path::trivial(src));
        heap.push(Label(Path::trivial(src)));
        while let Some(Label(path)) = heap.pop() {
            let u = *path.nodes.last().expect("non-empty path") as usize;
            if done[u] || best[u].as_ref() != Some(&path) {
                continue;
            }
            done[u] = true;
            for &(v, link) in &self.adjacency[u] {
                if done[v as usize] {
                    continue;
                }
                let l = &self.links[link];
                let mut cand = path.clone();
                cand.nodes.push(v);
                cand.links.push(link);
                cand.weight += l.weight;
                cand.delay_ms += l.delay_ms;
                let better = match &best[v as usize] {
                    None => true,
                    Some(cur) => route_order(&cand, cur) == Ordering::Less,
                };
                if better {
                    best[v as usize] = Some(cand.clone());
                    heap.push(Label(cand));
                }
            }
        }
        best
    }

    /// FH, MH and BH routes of BS `k` when its DU runs on `du` and its CU on
    /// `cu`. Placing both on one server yields an empty midhaul.
    pub fn shortest_paths(&self, k: usize, du: NodeId, cu: NodeId) -> Result<PathEntry<'_>> {
        let ru = *self
            .rus
            .get(k)
            .ok_or_else(|| Error::Topology(format!("no RU for BS {k}")))?;
        let di = self.du_index(du).ok_or_else(|| Error::Topology(format!("{du} is not a DU server")))?;
        let ci = self.cu_index(cu).ok_or_else(|| Error::Topology(format!("{cu} is not a CU server")))?;
        let fronthaul = self.paths.fronthaul[k][di]
            .as_ref()
            .ok_or(Error::RoutingInfeasible { from: ru, to: du })?;
        let midhaul = self.paths.midhaul[di][ci]
            .as_ref()
            .ok_or(Error::RoutingInfeasible { from: du, to: cu })?;
        let backhaul = self.paths.backhaul[ci]
            .as_ref()
            .ok_or(Error::RoutingInfeasible { from: cu, to: 0 })?;
        Ok(PathEntry { fronthaul, midhaul, backhaul })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    /// RU node ids in ascending order; BS k owns `rus()[k]`.
    pub fn rus(&self) -> &[NodeId] {
        &self.rus
    }

    pub fn du_servers(&self) -> &[NodeId] {
        &self.du_servers
    }

    pub fn cu_servers(&self) -> &[NodeId] {
        &self.cu_servers
    }

    pub fn mec_servers(&self) -> &[NodeId] {
        &self.mec_servers
    }

    pub fn du_index(&self, id: NodeId) -> Option<usize> {
        self.du_servers.iter().position(|&s| s == id)
    }

    pub fn cu_index(&self, id: NodeId) -> Option<usize> {
        self.cu_servers.iter().position(|&s| s == id)
    }

    /// All distinct DU/CU candidate servers in ascending id order.
    pub fn servers(&self) -> Vec<NodeId> {
        let set: BTreeSet<NodeId> =
            self.du_servers.iter().chain(&self.cu_servers).copied().collect();
        set.into_iter().collect()
    }

    pub fn capacity_rc(&self, server: NodeId) -> f64 {
        self.capacity_rc.get(&server).copied().unwrap_or(0.0)
    }

    pub fn rate(&self, server: NodeId) -> f64 {
        self.rate.get(&server).copied().unwrap_or(1.0)
    }
}

fn route_order(a: &Path, b: &Path) -> Ordering {
    a.weight
        .total_cmp(&b.weight)
        .then_with(|| a.nodes.cmp(&b.nodes))
        .then_with(|| a.links.cmp(&b.links))
}
