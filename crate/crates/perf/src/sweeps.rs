//! Bandwidth sensitivity and batch-size sweeps.

use std::io::Write;

use serde::Serialize;
use zkspeed_core::sumcheck::CompositionKind;

use crate::batch::{fracmle_batch_optimizer, BatchParams};
use crate::costs::CostTables;
use crate::design::DesignPoint;
use crate::model::{Model, Workload};
use crate::sumcheck_model::sumcheck_latency;
use crate::PerfError;

pub const SWEEP_SCHEMA: &str = "zkspeed.sweep.v1";
pub const BATCH_SCHEMA: &str = "zkspeed.batch.v1";

pub const SWEEP_PES: [u32; 5] = [1, 2, 4, 8, 16];
pub const SWEEP_BANDWIDTHS: [u32; 4] = [512, 1024, 2048, 4096];
pub const BASELINE_BANDWIDTH: u32 = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SweepUnit {
    Msm,
    SumCheck,
}

impl SweepUnit {
    pub fn name(self) -> &'static str {
        match self {
            Self::Msm => "msm",
            Self::SumCheck => "sumcheck",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub unit: SweepUnit,
    pub pes: u32,
    pub bandwidth_gbps: u32,
    pub cycles: u64,
    /// Relative to one PE at the baseline bandwidth.
    pub speedup: f64,
}

fn unit_cycles(model: &Model, unit: SweepUnit, d: &DesignPoint, w: &Workload) -> Result<u64, PerfError> {
    Ok(match unit {
        SweepUnit::Msm => model.evaluate(d, w)?.msm_cycles(),
        SweepUnit::SumCheck => [
            CompositionKind::ZeroCheck,
            CompositionKind::PermCheck,
            CompositionKind::OpenCheck,
        ]
        .iter()
        .map(|&k| sumcheck_latency(w.mu, k, d, &model.costs).cycles)
        .sum(),
    })
}

fn with_pes(base: &DesignPoint, unit: SweepUnit, pes: u32) -> DesignPoint {
    let mut d = *base;
    match unit {
        SweepUnit::Msm => d.msm_pes = pes,
        SweepUnit::SumCheck => d.sumcheck_pes = pes,
    }
    d
}

/// Speedup of each unit as its PE count and the bandwidth grow, other knobs
/// held at `base`.
pub fn bandwidth_sweep(model: &Model, base: &DesignPoint, w: &Workload) -> Result<Vec<SweepRow>, PerfError> {
    let mut rows = Vec::new();
    for unit in [SweepUnit::Msm, SweepUnit::SumCheck] {
        let baseline = unit_cycles(
            model,
            unit,
            &with_pes(base, unit, 1).with_bandwidth(BASELINE_BANDWIDTH),
            w,
        )?;
        for bw in SWEEP_BANDWIDTHS {
            for pes in SWEEP_PES {
                let cycles = unit_cycles(model, unit, &with_pes(base, unit, pes).with_bandwidth(bw), w)?;
                rows.push(SweepRow {
                    unit,
                    pes,
                    bandwidth_gbps: bw,
                    cycles,
                    speedup: baseline as f64 / cycles.max(1) as f64,
                });
            }
        }
    }
    Ok(rows)
}

pub fn speedup(rows: &[SweepRow], unit: SweepUnit, pes: u32, bw: u32) -> Option<f64> {
    rows.iter()
        .find(|r| r.unit == unit && r.pes == pes && r.bandwidth_gbps == bw)
        .map(|r| r.speedup)
}

fn csv_err(e: impl std::fmt::Display) -> PerfError {
    PerfError::Parse(e.to_string())
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<(), PerfError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["schema", "unit", "pes", "bandwidth_gbps", "cycles", "speedup"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            SWEEP_SCHEMA.to_string(),
            r.unit.name().to_string(),
            r.pes.to_string(),
            r.bandwidth_gbps.to_string(),
            r.cycles.to_string(),
            format!("{:.6}", r.speedup),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

/// Batch-size sweep as CSV; the `optimal` column marks the argmin row.
pub fn write_batch_csv<W: Write>(out: W, c: &CostTables, max_log2: u32) -> Result<u64, PerfError> {
    let (rows, best) = fracmle_batch_optimizer(&BatchParams::from_costs(c), max_log2);
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "schema",
        "batch",
        "partial_products",
        "tree_and_inverse",
        "imbalance",
        "occupancy",
        "units",
        "area_mm2",
        "optimal",
    ])
    .map_err(csv_err)?;
    for r in &rows {
        w.write_record([
            BATCH_SCHEMA.to_string(),
            r.batch.to_string(),
            r.partial_products.to_string(),
            r.tree_and_inverse.to_string(),
            r.imbalance.to_string(),
            r.occupancy.to_string(),
            r.units.to_string(),
            format!("{:.4}", r.area_mm2),
            ((r.batch == best.batch) as u8).to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)?;
    Ok(best.batch)
}
