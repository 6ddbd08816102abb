//! Cost anchors and model parameters, loaded from TOML.

use serde::{Deserialize, Serialize};

use crate::PerfError;

pub const COSTS_TOML: &str = include_str!("../presets/costs.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitCost {
    pub area_mm2: f64,
    pub power_w: f64,
    /// Share of the anchor that does not scale with the unit's knobs.
    pub base_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    pub msm: UnitCost,
    pub sumcheck: UnitCost,
    pub nd: UnitCost,
    pub fracmle: UnitCost,
    pub mle_combine: UnitCost,
    pub mle_update: UnitCost,
    pub tree: UnitCost,
    pub other: UnitCost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SramCost {
    pub area_mm2: f64,
    pub power_w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhyTier {
    pub name: String,
    pub max_gbps: u32,
    pub gbps_per_phy: u32,
    pub area_mm2: f64,
    pub power_w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Totals {
    pub compute_area_mm2: f64,
    pub compute_power_w: f64,
    pub memory_area_mm2: f64,
    pub memory_power_w: f64,
    pub area_mm2: f64,
    pub power_w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sharing {
    pub sumcheck_pe_modmuls: u32,
    pub sumcheck_pe_modmuls_unshared: u32,
    pub combine_modmuls: u32,
    pub combine_modmuls_unshared: u32,
}

impl Sharing {
    pub fn sumcheck_saving(&self) -> f64 {
        1.0 - self.sumcheck_pe_modmuls as f64 / self.sumcheck_pe_modmuls_unshared as f64
    }

    pub fn combine_saving(&self) -> f64 {
        1.0 - self.combine_modmuls as f64 / self.combine_modmuls_unshared as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub padd_depth: u32,
    pub reorder_depth: u32,
    pub group_size: u32,
    pub modmul_latency: u32,
    pub inversion_latency: u32,
    pub inversion_batch: u32,
    pub msm_bucket_fraction: f64,
    pub tree_lanes: u32,
    pub batch_eval_units: u32,
    pub zerocheck_tail: u32,
    pub permcheck_tail: u32,
    pub sha3_cycles: u32,
    pub resident_tables: u32,
    pub mle_compression: f64,
    pub bucket_sample: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostTables {
    pub clock_ghz: f64,
    pub reference_mu: u32,
    pub scalar_bytes: u32,
    pub point_bytes: u32,
    pub modmul_area_255: f64,
    pub modmul_area_381: f64,
    pub units: Units,
    pub sram: SramCost,
    pub phy: Vec<PhyTier>,
    pub totals: Totals,
    pub sharing: Sharing,
    pub model: ModelParams,
}

impl Default for CostTables {
    fn default() -> Self {
        parse_cost_tables(COSTS_TOML).expect("bundled cost tables are valid")
    }
}

/// Parses and validates a cost table file.
pub fn parse_cost_tables(text: &str) -> Result<CostTables, PerfError> {
    let c: CostTables = toml::from_str(text).map_err(|e| PerfError::Parse(e.to_string()))?;
    c.validate()?;
    Ok(c)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

impl CostTables {
    pub fn unit_rows(&self) -> [(&'static str, &UnitCost); 8] {
        let u = &self.units;
        [
            ("msm", &u.msm),
            ("sumcheck", &u.sumcheck),
            ("nd", &u.nd),
            ("fracmle", &u.fracmle),
            ("mle_combine", &u.mle_combine),
            ("mle_update", &u.mle_update),
            ("tree", &u.tree),
            ("other", &u.other),
        ]
    }

    /// PHY tier, PHY count for a bandwidth.
    pub fn phy_for(&self, gbps: u32) -> Result<(&PhyTier, u32), PerfError> {
        let tier = self
            .phy
            .iter()
            .find(|t| gbps <= t.max_gbps)
            .ok_or(PerfError::NoPhyTier(gbps))?;
        Ok((tier, gbps.div_ceil(tier.gbps_per_phy)))
    }

    pub fn validate(&self) -> Result<(), PerfError> {
        let bad = |m: String| Err(PerfError::Costs(m));
        if !(self.clock_ghz > 0.0) {
            return bad("clock must be positive".into());
        }
        for (name, u) in self.unit_rows() {
            if !(u.area_mm2 >= 0.0 && u.power_w >= 0.0) {
                return bad(format!("{name}: negative anchor"));
            }
            if !(0.0..=1.0).contains(&u.base_fraction) {
                return bad(format!("{name}: base_fraction outside [0, 1]"));
            }
        }
        if self.phy.is_empty() {
            return bad("no PHY tiers".into());
        }
        for w in self.phy.windows(2) {
            if w[0].max_gbps >= w[1].max_gbps {
                return bad("PHY tiers must be sorted by max_gbps".into());
            }
        }
        if self
            .phy
            .iter()
            .any(|t| t.gbps_per_phy == 0 || t.area_mm2 < 0.0 || t.power_w < 0.0)
        {
            return bad("PHY tier with zero bandwidth or negative cost".into());
        }
        let m = &self.model;
        if m.padd_depth == 0 || m.reorder_depth == 0 || m.group_size == 0 || m.tree_lanes == 0 {
            return bad("pipeline parameters must be positive".into());
        }
        if m.batch_eval_units == 0 || m.inversion_batch == 0 || m.bucket_sample == 0 {
            return bad("unit counts must be positive".into());
        }
        if !(m.mle_compression >= 1.0) || !(0.0..1.0).contains(&m.msm_bucket_fraction) {
            return bad("compression below 1 or bucket fraction outside [0, 1)".into());
        }
        let t = &self.totals;
        let (ca, cp): (f64, f64) = self
            .unit_rows()
            .iter()
            .fold((0.0, 0.0), |(a, p), (_, u)| (a + u.area_mm2, p + u.power_w));
        if !close(ca, t.compute_area_mm2) || !close(cp, t.compute_power_w) {
            return bad(format!("unit rows sum to {ca} mm2 / {cp} W, totals say otherwise"));
        }
        let (phy, n) = self.phy_for(crate::design::DesignPoint::REFERENCE.bandwidth_gbps)?;
        let ma = self.sram.area_mm2 + n as f64 * phy.area_mm2;
        let mp = self.sram.power_w + n as f64 * phy.power_w;
        if !close(ma, t.memory_area_mm2) || !close(mp, t.memory_power_w) {
            return bad(format!("memory rows sum to {ma} mm2 / {mp} W"));
        }
        if !close(ca + ma, t.area_mm2) || !close(cp + mp, t.power_w) {
            return bad("compute + memory does not match the total".into());
        }
        Ok(())
    }
}
