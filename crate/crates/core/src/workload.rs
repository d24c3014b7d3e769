//! Per-slot demand vectors and the demand-to-compute utilization model.
//!
//! Demands are indexed by BS `k` and service `c`, where `c = 0` is legacy
//! traffic and `c = 1..=|C|` are the MEC classes.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::splits::Split;
use crate::{Error, Result};

pub const SLOTS_PER_DAY: usize = 144;

/// MEC service class. Inelastic classes carry a hard delay threshold;
/// elastic classes are priced through the delay cost of the reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ServiceClass {
    Inelastic { d_th: f64 },
    Elastic,
}

impl ServiceClass {
    pub fn is_inelastic(&self) -> bool {
        matches!(self, ServiceClass::Inelastic { .. })
    }

    /// One inelastic class (threshold 1) and one elastic class.
    pub fn default_pair() -> Vec<ServiceClass> {
        vec![ServiceClass::Inelastic { d_th: 1.0 }, ServiceClass::Elastic]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandSlot {
    pub t: usize,
    /// Row-major `[k][c]`, `c = 0` legacy.
    demands: Vec<f64>,
    services: usize,
}

impl DemandSlot {
    /// `services` counts legacy plus MEC classes.
    pub fn zeros(t: usize, num_bs: usize, services: usize) -> Self {
        Self { t, demands: vec![0.0; num_bs * services], services }
    }

    pub fn from_rows(t: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let services = rows.first().map_or(0, Vec::len);
        let mut demands = Vec::with_capacity(rows.len() * services);
        for row in rows {
            if row.len() != services {
                return Err(Error::Workload("ragged demand rows".into()));
            }
            for &d in row {
                check_demand(d)?;
                demands.push(d);
            }
        }
        Ok(Self { t, demands, services })
    }

    pub fn num_bs(&self) -> usize {
        if self.services == 0 {
            0
        } else {
            self.demands.len() / self.services
        }
    }

    pub fn services(&self) -> usize {
        self.services
    }

    pub fn get(&self, k: usize, c: usize) -> f64 {
        self.demands[k * self.services + c]
    }

    pub fn set(&mut self, k: usize, c: usize, demand: f64) -> Result<()> {
        check_demand(demand)?;
        self.demands[k * self.services + c] = demand;
        Ok(())
    }

    pub fn legacy(&self, k: usize) -> f64 {
        self.get(k, 0)
    }

    /// Demand of MEC class `c` (0-based over MEC classes only).
    pub fn mec(&self, k: usize, c: usize) -> f64 {
        self.get(k, c + 1)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.demands
    }
}

fn check_demand(d: f64) -> Result<()> {
    if d >= 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::Workload(format!("demand {d} must be finite and >= 0")))
    }
}

/// One trace row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: usize,
    pub bs: usize,
    pub svc: usize,
    pub demand_gbps: f64,
}

/// Groups trace rows into dense slots covering every `(k, c)`. Rows must be
/// sorted by `t`; cells absent from the trace stay 0 and are reported in the
/// returned warnings.
pub fn slots_from_records(
    records: &[TraceRecord],
    num_bs: usize,
    services: usize,
) -> Result<(Vec<DemandSlot>, Vec<String>)> {
    let mut warnings = Vec::new();
    let Some(max_t) = records.iter().map(|r| r.t).max() else {
        return Ok((Vec::new(), warnings));
    };
    let horizon = max_t + 1;
    let mut slots: Vec<DemandSlot> =
        (0..horizon).map(|t| DemandSlot::zeros(t, num_bs, services)).collect();
    let mut seen: BTreeMap<(usize, usize, usize), ()> = BTreeMap::new();
    let mut prev_t = 0;
    for (i, r) in records.iter().enumerate() {
        if r.t < prev_t {
            return Err(Error::Workload(format!("record {i}: rows not sorted by t")));
        }
        prev_t = r.t;
        if r.bs >= num_bs || r.svc >= services {
            return Err(Error::Workload(format!(
                "record {i}: (bs {}, svc {}) outside {num_bs} BSs x {services} services",
                r.bs, r.svc
            )));
        }
        slots[r.t].set(r.bs, r.svc, r.demand_gbps)?;
        if seen.insert((r.t, r.bs, r.svc), ()).is_some() {
            warnings.push(format!("slot {} bs {} svc {} given twice, last wins", r.t, r.bs, r.svc));
        }
    }
    let expected = horizon * num_bs * services;
    if seen.len() < expected {
        warnings.push(format!("{} missing demand cells defaulted to 0", expected - seen.len()));
    }
    Ok((slots, warnings))
}

/// Diurnal synthetic demands: a sinusoid per (k, c) with a per-BS phase
/// offset plus seeded Gaussian noise, clipped to `[0, peak]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub seed: u64,
    pub horizon: usize,
    pub num_bs: usize,
    pub mec_classes: usize,
    pub peak_gbps: f64,
    /// Noise std as a fraction of the peak.
    pub noise: f64,
}

pub fn synth_demands(p: &SynthParams) -> Result<Vec<DemandSlot>> {
    if p.horizon % SLOTS_PER_DAY != 0 {
        return Err(Error::Workload(format!(
            "horizon {} is not a multiple of {SLOTS_PER_DAY} slots",
            p.horizon
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let services = p.mec_classes + 1;
    let phases: Vec<f64> = (0..p.num_bs).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let noise = Normal::new(0.0, p.noise.max(0.0) * p.peak_gbps.max(0.0))
        .map_err(|e| Error::Workload(format!("{e}")))?;
    let mut out = Vec::with_capacity(p.horizon);
    for t in 0..p.horizon {
        let mut slot = DemandSlot::zeros(t, p.num_bs, services);
        let angle = 2.0 * PI * (t % SLOTS_PER_DAY) as f64 / SLOTS_PER_DAY as f64;
        for k in 0..p.num_bs {
            for c in 0..services {
                // legacy swings over the full peak, MEC classes over half of it
                let amp = if c == 0 { 1.0 } else { 0.5 };
                let base = amp * p.peak_gbps * 0.5 * (1.0 + libm::sin(angle + phases[k] + c as f64));
                let d = (base + noise.sample(&mut rng)).clamp(0.0, p.peak_gbps.max(0.0));
                slot.set(k, c, d)?;
            }
        }
        out.push(slot);
    }
    Ok(out)
}

/// The same demand row in every slot.
pub fn constant_demands(horizon: usize, rows: &[Vec<f64>]) -> Result<Vec<DemandSlot>> {
    (0..horizon).map(|t| DemandSlot::from_rows(t, rows)).collect()
}

/// Affine demand-to-utilization model with optional Gaussian noise, in RC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilizationModel {
    pub platform_id: String,
    pub bbu_base: f64,
    pub bbu_slope: f64,
    /// Per MEC class.
    pub mec_base: Vec<f64>,
    pub mec_slope: Vec<f64>,
    pub noise_std: f64,
}

impl UtilizationModel {
    pub fn platform_a(mec_classes: usize) -> Self {
        Self {
            platform_id: "A".into(),
            bbu_base: 0.5,
            bbu_slope: 1.5,
            mec_base: vec![0.2; mec_classes],
            mec_slope: vec![1.0; mec_classes],
            noise_std: 0.0,
        }
    }

    /// Platform A with 25% steeper slopes and 10% higher bases.
    pub fn platform_b(mec_classes: usize) -> Self {
        let a = Self::platform_a(mec_classes);
        Self {
            platform_id: "B".into(),
            bbu_base: a.bbu_base * 1.1,
            bbu_slope: a.bbu_slope * 1.25,
            mec_base: a.mec_base.iter().map(|b| b * 1.1).collect(),
            mec_slope: a.mec_slope.iter().map(|s| s * 1.25).collect(),
            noise_std: a.noise_std,
        }
    }

    pub fn validate(&self, mec_classes: usize) -> Result<()> {
        if self.mec_base.len() != mec_classes || self.mec_slope.len() != mec_classes {
            return Err(Error::Config(format!(
                "utilization model covers {} MEC classes, expected {mec_classes}",
                self.mec_base.len().min(self.mec_slope.len())
            )));
        }
        let params = [self.bbu_base, self.bbu_slope, self.noise_std];
        if params.iter().chain(&self.mec_base).chain(&self.mec_slope).any(|&v| !(v >= 0.0)) {
            return Err(Error::Config("utilization parameters must be >= 0".into()));
        }
        Ok(())
    }

    fn noise<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.noise_std > 0.0 {
            let n: f64 = rng.sample(rand_distr::StandardNormal);
            n * self.noise_std
        } else {
            0.0
        }
    }

    /// Actual (DU, CU) baseband utilization for legacy demand `lambda`.
    pub fn bbu_utilization<R: Rng + ?Sized>(&self, split: Split, lambda: f64, rng: &mut R) -> (f64, f64) {
        let total = (self.bbu_base + self.bbu_slope * lambda + self.noise(rng)).max(0.0);
        let (du, cu) = split.compute_shares();
        (du * total, cu * total)
    }

    /// Actual utilization of MEC class `c` (0-based) for demand `lambda`.
    pub fn mec_utilization<R: Rng + ?Sized>(&self, c: usize, lambda: f64, rng: &mut R) -> f64 {
        (self.mec_base[c] + self.mec_slope[c] * lambda + self.noise(rng)).max(0.0)
    }
}
