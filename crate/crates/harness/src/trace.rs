//! Demand traces: CSV with header `t,bs,svc,demand_gbps`, one row per
//! (slot, base station, service), service 0 being the legacy RAN traffic.

use std::path::Path;

use anyhow::{Context, Result};
use oranmec_core::workload::{slots_from_records, DemandSlot, TraceRecord};
use serde::{Deserialize, Serialize};

pub const HEADER: [&str; 4] = ["t", "bs", "svc", "demand_gbps"];

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    t: usize,
    bs: usize,
    svc: usize,
    demand_gbps: f64,
}

/// Reads a trace into dense slots. Rows may come in any order; missing cells
/// are zero and reported as a warning.
pub fn load(path: &Path, num_bs: usize, services: usize) -> Result<Vec<DemandSlot>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening trace {}", path.display()))?;
    let headers = reader.headers()?.clone();
    anyhow::ensure!(
        headers.iter().eq(HEADER),
        "trace {}: header must be {}, found {}",
        path.display(),
        HEADER.join(","),
        headers.iter().collect::<Vec<_>>().join(",")
    );
    let mut records = Vec::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let r = row.with_context(|| format!("trace {} row {}", path.display(), i + 2))?;
        records.push(TraceRecord { t: r.t, bs: r.bs, svc: r.svc, demand_gbps: r.demand_gbps });
    }
    records.sort_by_key(|r| r.t);
    let (slots, warnings) = slots_from_records(&records, num_bs, services)
        .with_context(|| format!("trace {}", path.display()))?;
    for w in warnings {
        log::warn!("trace {}: {w}", path.display());
    }
    Ok(slots)
}

/// Writes slots in trace format.
pub fn save(path: &Path, slots: &[DemandSlot]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for s in slots {
        for k in 0..s.num_bs() {
            for c in 0..s.services() {
                w.serialize(Row { t: s.t, bs: k, svc: c, demand_gbps: s.get(k, c) })?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
