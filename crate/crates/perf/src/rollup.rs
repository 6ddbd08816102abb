//! Area and power roll-up, scaled linearly from the anchors.

use serde::Serialize;

use crate::costs::{CostTables, UnitCost};
use crate::design::DesignPoint;
use crate::PerfError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub name: &'static str,
    pub area_mm2: f64,
    pub power_w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rollup {
    pub compute: Vec<Row>,
    pub sram: Row,
    pub phy: Row,
    pub phy_count: u32,
    pub sram_bytes: f64,
}

impl Rollup {
    pub fn compute_area(&self) -> f64 {
        self.compute.iter().map(|r| r.area_mm2).sum()
    }

    pub fn compute_power(&self) -> f64 {
        self.compute.iter().map(|r| r.power_w).sum()
    }

    pub fn memory_area(&self) -> f64 {
        self.sram.area_mm2 + self.phy.area_mm2
    }

    pub fn memory_power(&self) -> f64 {
        self.sram.power_w + self.phy.power_w
    }

    pub fn area(&self) -> f64 {
        self.compute_area() + self.memory_area()
    }

    pub fn power(&self) -> f64 {
        self.compute_power() + self.memory_power()
    }

    /// Area without PHYs, for comparisons against a die with separate I/O.
    pub fn area_without_phy(&self) -> f64 {
        self.compute_area() + self.sram.area_mm2
    }

    pub fn row(&self, name: &str) -> Option<&Row> {
        self.compute
            .iter()
            .chain([&self.sram, &self.phy])
            .find(|r| r.name == name)
    }
}

/// Per-unit sizes that area scales with; only ratios to the reference matter.
fn unit_sizes(d: &DesignPoint, c: &CostTables, shared: bool) -> [f64; 8] {
    let b = c.model.msm_bucket_fraction;
    let buckets = ((1u64 << d.msm_window) - 1) as f64 / 511.0;
    let sc_mm = if shared {
        c.sharing.sumcheck_pe_modmuls
    } else {
        c.sharing.sumcheck_pe_modmuls_unshared
    };
    let cb_mm = if shared {
        c.sharing.combine_modmuls
    } else {
        c.sharing.combine_modmuls_unshared
    };
    [
        d.msm_pes as f64 * ((1.0 - b) + b * buckets),
        d.sumcheck_pes as f64 * sc_mm as f64,
        d.fracmle_pes as f64,
        d.fracmle_pes as f64,
        cb_mm as f64,
        (d.mle_update_pes * d.modmuls_per_update_pe) as f64,
        1.0,
        1.0,
    ]
}

const ROW_NAMES: [&str; 8] = [
    "MSM",
    "SumCheck",
    "Construct N&D",
    "FracMLE",
    "MLE Combine",
    "MLE Update",
    "Multifunction Tree",
    "Other",
];

/// Batched inverse units that mask one inversion at batch size `n`.
pub fn inverse_units(n: u32, c: &CostTables) -> u32 {
    crate::batch::batch_latency(n as u64, &crate::batch::BatchParams::from_costs(c)).units as u32
}

/// On-chip bytes: compressed circuit tables, MSM point banks, FracMLE
/// partial products and batch registers.
pub fn sram_bytes(d: &DesignPoint, mu: u32, c: &CostTables) -> f64 {
    let m = &c.model;
    let tables = m.resident_tables as f64 * (1u64 << mu) as f64 * c.scalar_bytes as f64 / m.mle_compression;
    let msm = d.msm_pes as f64 * d.msm_points_per_pe as f64 * 1.5 * c.point_bytes as f64;
    let units = inverse_units(m.inversion_batch, c) as f64;
    let frac = d.fracmle_pes as f64 * units * m.inversion_batch as f64 * 2.0 * c.scalar_bytes as f64;
    tables + msm + frac
}

fn scaled(u: &UnitCost, size: f64, size_ref: f64) -> (f64, f64) {
    let g = |s: f64| u.base_fraction * size_ref + (1.0 - u.base_fraction) * s;
    let ratio = if size_ref == 0.0 { 1.0 } else { g(size) / g(size_ref) };
    (u.area_mm2 * ratio, u.power_w * ratio)
}

/// Roll-up without knob-domain checks; zero-PE designs give base areas.
pub fn rollup_unchecked(d: &DesignPoint, mu: u32, c: &CostTables, shared: bool) -> Result<Rollup, PerfError> {
    let r = DesignPoint::REFERENCE;
    let sizes = unit_sizes(d, c, shared);
    let refs = unit_sizes(&r, c, true);
    let compute = c
        .unit_rows()
        .iter()
        .zip(ROW_NAMES)
        .enumerate()
        .map(|(i, ((_, u), name))| {
            let (area_mm2, power_w) = scaled(u, sizes[i], refs[i]);
            Row {
                name,
                area_mm2,
                power_w,
            }
        })
        .collect();
    let bytes = sram_bytes(d, mu, c);
    let ratio = bytes / sram_bytes(&r, c.reference_mu, c);
    let sram = Row {
        name: "SRAM",
        area_mm2: c.sram.area_mm2 * ratio,
        power_w: c.sram.power_w * ratio,
    };
    let (tier, n) = c.phy_for(d.bandwidth_gbps)?;
    let phy = Row {
        name: "PHY",
        area_mm2: n as f64 * tier.area_mm2,
        power_w: n as f64 * tier.power_w,
    };
    Ok(Rollup {
        compute,
        sram,
        phy,
        phy_count: n,
        sram_bytes: bytes,
    })
}

/// Area and power of `d` at the cost tables' reference problem size.
pub fn area_power_rollup(d: &DesignPoint, c: &CostTables) -> Result<Rollup, PerfError> {
    rollup_at(d, c.reference_mu, c)
}

/// Area and power of `d` with on-chip tables sized for `2^mu` gates.
pub fn rollup_at(d: &DesignPoint, mu: u32, c: &CostTables) -> Result<Rollup, PerfError> {
    d.validate()?;
    rollup_unchecked(d, mu, c, true)
}
