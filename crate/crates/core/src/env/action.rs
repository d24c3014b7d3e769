//! Joint actions and their per-BS decomposition into branch sub-actions.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::splits::Split;
use crate::topology::{NodeId, Topology};
use crate::{Error, Result};

/// Configuration of one BS: split, DU/CU/MEC flavors (RC), DU/CU hosting
/// servers, and whether each MEC class is co-located with the CU.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BsAction {
    pub split: Split,
    pub du_flavor: u32,
    pub cu_flavor: u32,
    pub mec_flavor: Vec<u32>,
    pub du_server: NodeId,
    pub cu_server: NodeId,
    pub mec_at_cu: Vec<bool>,
}

impl BsAction {
    /// Allocated compute at the DU-side host (DU plus DU-hosted MEC).
    pub fn du_side_load(&self) -> f64 {
        let mec: u32 = self
            .mec_flavor
            .iter()
            .zip(&self.mec_at_cu)
            .filter(|(_, &at_cu)| !at_cu)
            .map(|(&z, _)| z)
            .sum();
        f64::from(self.du_flavor + mec)
    }

    /// Allocated compute at the CU-side host (CU plus CU-hosted MEC).
    pub fn cu_side_load(&self) -> f64 {
        let mec: u32 = self
            .mec_flavor
            .iter()
            .zip(&self.mec_at_cu)
            .filter(|(_, &at_cu)| at_cu)
            .map(|(&z, _)| z)
            .sum();
        f64::from(self.cu_flavor + mec)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub bs: Vec<BsAction>,
}

/// Which control variable a branch selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchKind {
    Split,
    DuFlavor,
    CuFlavor,
    MecFlavor(usize),
    DuServer,
    CuServer,
    MecAtCu(usize),
}

/// Finite domains of every control variable. Branch order within a BS is
/// split, DU flavor, CU flavor, MEC flavor per class, DU server, CU server,
/// MEC placement per class.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSpace {
    pub num_bs: usize,
    pub splits: Vec<Split>,
    pub mec_classes: usize,
    pub bbu_flavors: Vec<u32>,
    pub mec_flavors: Vec<u32>,
    pub du_servers: Vec<NodeId>,
    pub cu_servers: Vec<NodeId>,
}

impl ActionSpace {
    pub fn new(
        topo: &Topology,
        num_bs: usize,
        mec_classes: usize,
        bbu_flavors: Vec<u32>,
        mec_flavors: Vec<u32>,
    ) -> Result<Self> {
        if num_bs == 0 || num_bs > topo.rus().len() {
            return Err(Error::Config(format!(
                "{num_bs} BSs requested, topology has {} RUs",
                topo.rus().len()
            )));
        }
        if bbu_flavors.is_empty() || mec_flavors.is_empty() {
            return Err(Error::Config("flavor sets must be nonempty".into()));
        }
        Ok(Self {
            num_bs,
            splits: Split::ALL.to_vec(),
            mec_classes,
            bbu_flavors,
            mec_flavors,
            du_servers: topo.du_servers().to_vec(),
            cu_servers: topo.cu_servers().to_vec(),
        })
    }

    /// Sub-actions per BS.
    pub fn branches_per_bs(&self) -> usize {
        5 + 2 * self.mec_classes
    }

    pub fn num_branches(&self) -> usize {
        self.num_bs * self.branches_per_bs()
    }

    pub fn branch_kind(&self, m: usize) -> BranchKind {
        let c = self.mec_classes;
        match m {
            0 => BranchKind::Split,
            1 => BranchKind::DuFlavor,
            2 => BranchKind::CuFlavor,
            m if m < 3 + c => BranchKind::MecFlavor(m - 3),
            m if m == 3 + c => BranchKind::DuServer,
            m if m == 4 + c => BranchKind::CuServer,
            m => BranchKind::MecAtCu(m - 5 - c),
        }
    }

    fn kind_size(&self, kind: BranchKind) -> usize {
        match kind {
            BranchKind::Split => self.splits.len(),
            BranchKind::DuFlavor | BranchKind::CuFlavor => self.bbu_flavors.len(),
            BranchKind::MecFlavor(_) => self.mec_flavors.len(),
            BranchKind::DuServer => self.du_servers.len(),
            BranchKind::CuServer => self.cu_servers.len(),
            BranchKind::MecAtCu(_) => 2,
        }
    }

    /// Sub-action space size of every branch, BS-major.
    pub fn branch_sizes(&self) -> Vec<usize> {
        let per_bs: Vec<usize> =
            (0..self.branches_per_bs()).map(|m| self.kind_size(self.branch_kind(m))).collect();
        per_bs.iter().copied().cycle().take(self.num_branches()).collect()
    }

    /// Number of Q outputs a branching network needs.
    pub fn head_outputs(&self) -> usize {
        self.branch_sizes().iter().sum()
    }

    /// Size of the joint action space.
    pub fn cardinality(&self) -> u128 {
        self.branch_sizes().iter().map(|&s| s as u128).product()
    }

    pub fn decode(&self, indices: &[usize]) -> Result<Action> {
        if indices.len() != self.num_branches() {
            return Err(Error::Dimension { expected: self.num_branches(), got: indices.len() });
        }
        let sizes = self.branch_sizes();
        if let Some((b, _)) = indices.iter().zip(&sizes).enumerate().find(|(_, (i, s))| *i >= *s) {
            return Err(Error::InvalidAction(format!("branch {b} index {} out of range", indices[b])));
        }
        let m = self.branches_per_bs();
        let c = self.mec_classes;
        let bs = indices
            .chunks(m)
            .map(|idx| BsAction {
                split: self.splits[idx[0]],
                du_flavor: self.bbu_flavors[idx[1]],
                cu_flavor: self.bbu_flavors[idx[2]],
                mec_flavor: idx[3..3 + c].iter().map(|&i| self.mec_flavors[i]).collect(),
                du_server: self.du_servers[idx[3 + c]],
                cu_server: self.cu_servers[idx[4 + c]],
                mec_at_cu: idx[5 + c..].iter().map(|&i| i == 1).collect(),
            })
            .collect();
        Ok(Action { bs })
    }

    pub fn encode(&self, action: &Action) -> Result<Vec<usize>> {
        if action.bs.len() != self.num_bs {
            return Err(Error::InvalidAction(format!(
                "{} BS configurations, expected {}",
                action.bs.len(),
                self.num_bs
            )));
        }
        let find = |set: &[u32], v: u32, what: &str| {
            set.iter()
                .position(|&f| f == v)
                .ok_or_else(|| Error::InvalidAction(format!("{what} {v} not in its domain")))
        };
        let mut out = Vec::with_capacity(self.num_branches());
        for b in &action.bs {
            if b.mec_flavor.len() != self.mec_classes || b.mec_at_cu.len() != self.mec_classes {
                return Err(Error::InvalidAction("MEC fields do not match class count".into()));
            }
            out.push(
                self.splits
                    .iter()
                    .position(|&v| v == b.split)
                    .ok_or_else(|| Error::InvalidAction(format!("split {:?} not in its domain", b.split)))?,
            );
            out.push(find(&self.bbu_flavors, b.du_flavor, "DU flavor")?);
            out.push(find(&self.bbu_flavors, b.cu_flavor, "CU flavor")?);
            for &z in &b.mec_flavor {
                out.push(find(&self.mec_flavors, z, "MEC flavor")?);
            }
            out.push(find(&self.du_servers, b.du_server, "DU server")?);
            out.push(find(&self.cu_servers, b.cu_server, "CU server")?);
            out.extend(b.mec_at_cu.iter().map(|&z| usize::from(z)));
        }
        Ok(out)
    }

    pub fn validate(&self, action: &Action) -> Result<()> {
        self.encode(action).map(|_| ())
    }

    /// S1, 1-RC flavors (or the closest available), first DU/CU servers, all
    /// MEC at the DU.
    pub fn default_initial(&self) -> Action {
        let pick = |set: &[u32]| {
            *set.iter().min_by_key(|&&f| (f as i64 - 1).abs()).expect("nonempty flavor set")
        };
        let split = if self.splits.contains(&Split::S1) { Split::S1 } else { self.splits[0] };
        let b = BsAction {
            split,
            du_flavor: pick(&self.bbu_flavors),
            cu_flavor: pick(&self.bbu_flavors),
            mec_flavor: vec![pick(&self.mec_flavors); self.mec_classes],
            du_server: self.du_servers[0],
            cu_server: self.cu_servers[0],
            mec_at_cu: vec![false; self.mec_classes],
        };
        Action { bs: vec![b; self.num_bs] }
    }

    /// Exhaustive enumeration of the joint action space, refused when it
    /// holds more than `limit` actions.
    pub fn enumerate(&self, limit: u128) -> Result<ActionIter<'_>> {
        let cardinality = self.cardinality();
        if cardinality > limit {
            return Err(Error::OracleTooLarge { cardinality, limit });
        }
        Ok(ActionIter { space: self, sizes: self.branch_sizes(), next: Some(vec![0; self.num_branches()]) })
    }
}

/// Mixed-radix counter over branch indices; the last branch varies fastest.
pub struct ActionIter<'a> {
    space: &'a ActionSpace,
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for ActionIter<'_> {
    type Item = Action;

    fn next(&mut self) -> Option<Action> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.sizes[pos] {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(self.space.decode(&current).expect("counter stays in range"))
    }
}
