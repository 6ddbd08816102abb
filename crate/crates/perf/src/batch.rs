//! Inversion batch-size optimizer for the FracMLE unit.
//!
//! A batched inverse unit accepts one element per cycle. For a batch of `n`
//! it runs two things side by side once the batch is loaded: the sequential
//! partial products (`n` multiplications of latency `L`) and the multiplier
//! tree followed by the inversion (`L (log2 n - 1) + I`). Enough units are
//! instantiated round-robin to hide one batch's latency.

use serde::Serialize;

use crate::costs::CostTables;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchParams {
    pub modmul_latency: u64,
    pub inversion_latency: u64,
    /// Area of one 255-bit multiplier.
    pub mul_area: f64,
    /// Area per stored 32-byte element.
    pub element_area: f64,
}

impl BatchParams {
    pub fn from_costs(c: &CostTables) -> Self {
        Self {
            modmul_latency: c.model.modmul_latency as u64,
            inversion_latency: c.model.inversion_latency as u64,
            mul_area: c.modmul_area_255,
            element_area: 0.0005,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BatchLatency {
    pub batch: u64,
    pub partial_products: u64,
    pub tree_and_inverse: u64,
    pub imbalance: u64,
    /// Cycles one batch occupies a unit, load included.
    pub occupancy: u64,
    pub units: u64,
    pub area_mm2: f64,
}

pub fn batch_latency(n: u64, p: &BatchParams) -> BatchLatency {
    let n = n.max(1);
    let lg = 63 - n.leading_zeros() as u64;
    let pp = p.modmul_latency * n;
    let ti = p.modmul_latency * lg.saturating_sub(1) + p.inversion_latency;
    let occupancy = n + pp.max(ti);
    let units = occupancy.div_ceil(n);
    // Each unit holds its batch and partial products; one shared tree of
    // log2 n multipliers plus one output multiplier per unit.
    let area = units as f64 * (p.mul_area + 2.0 * n as f64 * p.element_area) + lg as f64 * p.mul_area;
    BatchLatency {
        batch: n,
        partial_products: pp,
        tree_and_inverse: ti,
        imbalance: pp.abs_diff(ti),
        occupancy,
        units,
        area_mm2: area,
    }
}

/// Sweeps `2^1 ..= 2^max_log2` and returns every row plus the argmin of the
/// latency imbalance (smallest batch on ties).
pub fn fracmle_batch_optimizer(p: &BatchParams, max_log2: u32) -> (Vec<BatchLatency>, BatchLatency) {
    let rows: Vec<BatchLatency> = (1..=max_log2).map(|k| batch_latency(1 << k, p)).collect();
    let best = *rows
        .iter()
        .min_by_key(|r| (r.imbalance, r.batch))
        .expect("at least one batch size");
    (rows, best)
}
