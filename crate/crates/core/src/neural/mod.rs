//! Branching Q-network: shared rectified trunk, one representation layer
//! per action branch, optional linear Q heads, and an Adam optimizer.

mod adam;
pub mod gemm;
mod net;

pub use adam::{Adam, AdamConfig};
pub use net::{BranchOutputs, BranchingQNet, HeadMode, NetConfig};
