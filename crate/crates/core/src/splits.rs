//! 3GPP split options and the four composite splits a BS can run.
//!
//! Loads are uplink Gbps for a demand of `lambda` Gbps, deadlines are in ms.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Highest demand a single BS can carry (100 MHz, 256QAM, 8 layers).
pub const MAX_DEMAND_GBPS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SplitOption {
    O1,
    O2,
    O3,
    O4,
    O5,
    O6,
    O7,
    O8,
}

/// `load(lambda) = slope * lambda + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineLoad {
    pub slope: f64,
    pub offset: f64,
}

impl AffineLoad {
    pub const fn new(slope: f64, offset: f64) -> Self {
        Self { slope, offset }
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        self.slope * lambda + self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub option: SplitOption,
    pub load: AffineLoad,
    /// Tabulated maximum load; metadata only, loads always follow `load`.
    pub max_load_gbps: f64,
    pub delay_req_ms: f64,
}

impl SplitOption {
    pub const ALL: [SplitOption; 8] = [
        SplitOption::O1,
        SplitOption::O2,
        SplitOption::O3,
        SplitOption::O4,
        SplitOption::O5,
        SplitOption::O6,
        SplitOption::O7,
        SplitOption::O8,
    ];

    pub const fn spec(self) -> SplitSpec {
        use SplitOption::*;
        let (load, max_load_gbps, delay_req_ms) = match self {
            O1 | O2 | O3 => (AffineLoad::new(1.0, 0.0), 4.0, 10.0),
            O4 | O5 => (AffineLoad::new(1.0, 0.0), 4.0, 1.0),
            O6 => (AffineLoad::new(1.02, 0.5), 4.13, 0.25),
            O7 => (AffineLoad::new(0.0, 10.1), 10.1, 0.25),
            O8 => (AffineLoad::new(0.0, 157.3), 157.3, 0.25),
        };
        SplitSpec { option: self, load, max_load_gbps, delay_req_ms }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Split {
    /// O2 high-layer split, O7 low-layer split.
    S1,
    /// O4 / O7.
    S2,
    /// O6 / O7.
    S3,
    /// Legacy C-RAN: whole baseband integrated at the DU-side server, O8 fronthaul.
    S4,
}

/// Share of total baseband compute per function, from the lowest PHY up:
/// LP, HP, LM, HM, LR, HR, PD and the remaining upper stack (RRC etc.).
const FUNCTION_SHARES: [f64; 8] = [0.48, 0.17, 0.07, 0.07, 0.005, 0.005, 0.10, 0.10];

impl Split {
    pub const ALL: [Split; 4] = [Split::S1, Split::S2, Split::S3, Split::S4];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Split> {
        Self::ALL.get(i).copied()
    }

    /// High-layer split option, `None` for S4.
    pub fn hls(self) -> Option<SplitOption> {
        match self {
            Split::S1 => Some(SplitOption::O2),
            Split::S2 => Some(SplitOption::O4),
            Split::S3 => Some(SplitOption::O6),
            Split::S4 => None,
        }
    }

    pub fn lls(self) -> SplitOption {
        match self {
            Split::S4 => SplitOption::O8,
            _ => SplitOption::O7,
        }
    }

    /// Number of functions (from the bottom of the stack) that stay at the
    /// DU side.
    fn functions_at_du(self) -> usize {
        match self {
            // O2 sits between PDCP and RLC: everything up to HR stays low.
            Split::S1 => 6,
            // O4 sits between RLC and MAC.
            Split::S2 => 4,
            // O6 sits between MAC and PHY.
            Split::S3 => 2,
            Split::S4 => FUNCTION_SHARES.len(),
        }
    }

    /// (DU fraction, CU fraction) of the baseband compute.
    pub fn compute_shares(self) -> (f64, f64) {
        let n = self.functions_at_du();
        let du: f64 = FUNCTION_SHARES[..n].iter().sum();
        // DU shares are all >= 0.5, so the subtraction is exact and the pair
        // sums to exactly 1.
        (du, 1.0 - du)
    }

    /// (HLS, LLS) deadlines in ms. S4 has no HLS, so its HLS deadline is
    /// infinite.
    pub fn delay_requirements(self) -> (f64, f64) {
        let hls = self.hls().map_or(f64::INFINITY, |o| o.spec().delay_req_ms);
        (hls, self.lls().spec().delay_req_ms)
    }

    /// (FH, MH, BH) loads in Gbps for legacy demand `lambda`.
    pub fn segment_loads(self, lambda: f64) -> Result<SegmentLoads> {
        self.segment_loads_with(&SplitCatalog::default(), lambda)
    }

    pub fn segment_loads_with(self, catalog: &SplitCatalog, lambda: f64) -> Result<SegmentLoads> {
        if !(lambda >= 0.0) {
            return Err(Error::Workload(alloc::format!("negative demand {lambda}")));
        }
        if lambda > MAX_DEMAND_GBPS {
            return Err(Error::DemandCap { demand: lambda, cap: MAX_DEMAND_GBPS });
        }
        let fronthaul = catalog.load(self.lls()).eval(lambda);
        // S4 carries the user plane toward the CU site unchanged.
        let midhaul = self.hls().map_or(lambda, |o| catalog.load(o).eval(lambda));
        Ok(SegmentLoads { fronthaul, midhaul, backhaul: lambda })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentLoads {
    pub fronthaul: f64,
    pub midhaul: f64,
    pub backhaul: f64,
}

impl SegmentLoads {
    pub fn total(&self) -> f64 {
        self.fronthaul + self.midhaul + self.backhaul
    }
}

/// Load functions per option, overridable for sensitivity studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitCatalog {
    loads: [AffineLoad; 8],
}

impl Default for SplitCatalog {
    fn default() -> Self {
        Self { loads: SplitOption::ALL.map(|o| o.spec().load) }
    }
}

impl SplitCatalog {
    pub fn load(&self, option: SplitOption) -> AffineLoad {
        self.loads[option as usize]
    }

    pub fn set_load(&mut self, option: SplitOption, load: AffineLoad) {
        self.loads[option as usize] = load;
    }
}
