use alloc::vec::Vec;

use super::action::{Action, ActionSpace, BsAction};
use crate::splits::{Split, MAX_DEMAND_GBPS};
use crate::workload::DemandSlot;
use crate::{Error, Result};

/// Flavors enter the network input divided by this.
pub const FLAVOR_SCALE: f64 = 15.0;

/// Current demands plus the configuration applied in the previous slot.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: usize,
    pub demands: DemandSlot,
    pub previous: Action,
}

/// Length of [`encode_state`]'s output.
pub fn encoded_len(space: &ActionSpace) -> usize {
    let c = space.mec_classes;
    let per_bs = (1 + c) + Split::ALL.len() + 2 + c + space.du_servers.len() + space.cu_servers.len() + 2 * c;
    space.num_bs * per_bs
}

/// Network input for a state. Per BS: demands / 4 Gbps, split one-hot,
/// DU and CU flavors / 15, MEC flavors / 15, DU-server one-hot, CU-server
/// one-hot, and a two-way one-hot of every MEC placement.
pub fn encode_state(space: &ActionSpace, state: &State) -> Result<Vec<f64>> {
    let c = space.mec_classes;
    if state.demands.num_bs() != space.num_bs || state.demands.services() != c + 1 {
        return Err(Error::Dimension {
            expected: space.num_bs * (c + 1),
            got: state.demands.as_slice().len(),
        });
    }
    let indices = space.encode(&state.previous)?;
    let m = space.branches_per_bs();
    let mut out = Vec::with_capacity(encoded_len(space));
    for (k, b) in state.previous.bs.iter().enumerate() {
        let idx = &indices[k * m..(k + 1) * m];
        out.extend((0..=c).map(|s| state.demands.get(k, s) / MAX_DEMAND_GBPS));
        one_hot(&mut out, b.split.index(), Split::ALL.len());
        out.push(f64::from(b.du_flavor) / FLAVOR_SCALE);
        out.push(f64::from(b.cu_flavor) / FLAVOR_SCALE);
        out.extend(b.mec_flavor.iter().map(|&z| f64::from(z) / FLAVOR_SCALE));
        one_hot(&mut out, idx[3 + c], space.du_servers.len());
        one_hot(&mut out, idx[4 + c], space.cu_servers.len());
        for &at_cu in &b.mec_at_cu {
            one_hot(&mut out, usize::from(at_cu), 2);
        }
    }
    Ok(out)
}

fn one_hot(out: &mut Vec<f64>, hot: usize, len: usize) {
    out.extend((0..len).map(|i| if i == hot { 1.0 } else { 0.0 }));
}

fn argmax(block: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in block.iter().enumerate() {
        if v > block[best] {
            best = i;
        }
    }
    best
}

/// Recovers the previous-configuration fields from an encoded state.
pub fn decode_previous(space: &ActionSpace, encoded: &[f64]) -> Result<Action> {
    if encoded.len() != encoded_len(space) {
        return Err(Error::Dimension { expected: encoded_len(space), got: encoded.len() });
    }
    let c = space.mec_classes;
    let per_bs = encoded.len() / space.num_bs;
    let flavor = |v: f64| libm::round(v * FLAVOR_SCALE) as u32;
    let bs = encoded
        .chunks(per_bs)
        .map(|e| {
            let mut p = 1 + c;
            let split = Split::ALL[argmax(&e[p..p + 4])];
            p += 4;
            let du_flavor = flavor(e[p]);
            let cu_flavor = flavor(e[p + 1]);
            p += 2;
            let mec_flavor = e[p..p + c].iter().map(|&v| flavor(v)).collect();
            p += c;
            let du_server = space.du_servers[argmax(&e[p..p + space.du_servers.len()])];
            p += space.du_servers.len();
            let cu_server = space.cu_servers[argmax(&e[p..p + space.cu_servers.len()])];
            p += space.cu_servers.len();
            let mec_at_cu = (0..c).map(|i| argmax(&e[p + 2 * i..p + 2 * i + 2]) == 1).collect();
            BsAction { split, du_flavor, cu_flavor, mec_flavor, du_server, cu_server, mec_at_cu }
        })
        .collect();
    Ok(Action { bs })
}
