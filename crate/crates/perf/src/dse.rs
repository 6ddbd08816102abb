//! Design-space enumeration and Pareto extraction.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::design::{DesignPoint, KnobDomains, KNOB_NAMES};
use crate::model::{Model, PerfReport, Workload};
use crate::PerfError;

pub const DSE_SCHEMA: &str = "zkspeed.dse.v1";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DseRow {
    pub index: usize,
    pub design: DesignPoint,
    pub runtime_ms: f64,
    pub area_mm2: f64,
    pub power_w: f64,
    pub witness_ms: f64,
    pub gate_ms: f64,
    pub wire_ms: f64,
    pub finish_ms: f64,
    pub msm_ms: f64,
    pub sumcheck_ms: f64,
    pub msm_area_mm2: f64,
    pub sumcheck_area_mm2: f64,
}

impl DseRow {
    pub fn from_report(index: usize, r: &PerfReport, clock_ghz: f64) -> Self {
        let ms = |c: u64| c as f64 / (clock_ghz * 1e6);
        let area = |name: &str| r.rollup.row(name).map_or(0.0, |x| x.area_mm2);
        Self {
            index,
            design: r.design,
            runtime_ms: r.runtime_ms,
            area_mm2: r.area_mm2,
            power_w: r.power_w,
            witness_ms: ms(r.witness.cycles),
            gate_ms: ms(r.gate.cycles),
            wire_ms: ms(r.wire.cycles),
            finish_ms: ms(r.finish.cycles),
            msm_ms: ms(r.msm_cycles()),
            sumcheck_ms: ms(r.sumcheck_cycles()),
            msm_area_mm2: area("MSM"),
            sumcheck_area_mm2: area("SumCheck"),
        }
    }
}

/// Evaluates every design of `domains` in parallel; rows come back in
/// enumeration order regardless of scheduling.
pub fn evaluate_all(model: &Model, domains: &KnobDomains, w: &Workload) -> Result<Vec<DseRow>, PerfError> {
    domains.validate()?;
    let clock = model.costs.clock_ghz;
    (0..domains.cardinality())
        .into_par_iter()
        .map(|i| {
            let d = domains.nth(i);
            model.evaluate(&d, w).map(|r| DseRow::from_report(i, &r, clock))
        })
        .collect()
}

/// Indices (into `rows`) of the non-dominated (area, runtime) points.
/// Among exact ties the lower bandwidth, then the lower index, is kept.
pub fn pareto_front(rows: &[DseRow]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&rows[a], &rows[b]);
        x.area_mm2
            .total_cmp(&y.area_mm2)
            .then(x.runtime_ms.total_cmp(&y.runtime_ms))
            .then(x.design.bandwidth_gbps.cmp(&y.design.bandwidth_gbps))
            .then(x.index.cmp(&y.index))
    });
    let mut best = f64::INFINITY;
    let mut out = Vec::new();
    for i in order {
        if rows[i].runtime_ms < best {
            best = rows[i].runtime_ms;
            out.push(i);
        }
    }
    out
}

/// `a` is no worse than `b` on both axes and better on one.
pub fn dominates(a: &DseRow, b: &DseRow) -> bool {
    a.area_mm2 <= b.area_mm2 && a.runtime_ms <= b.runtime_ms && (a.area_mm2 < b.area_mm2 || a.runtime_ms < b.runtime_ms)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Frontiers {
    /// Frontier indices per bandwidth, in ascending bandwidth order.
    pub per_bandwidth: Vec<(u32, Vec<usize>)>,
    pub global: Vec<usize>,
}

impl Frontiers {
    pub fn of(rows: &[DseRow]) -> Self {
        let mut bws: Vec<u32> = rows.iter().map(|r| r.design.bandwidth_gbps).collect();
        bws.sort_unstable();
        bws.dedup();
        let per_bandwidth = bws
            .iter()
            .map(|&bw| {
                let idx: Vec<usize> = (0..rows.len())
                    .filter(|&i| rows[i].design.bandwidth_gbps == bw)
                    .collect();
                let sub: Vec<DseRow> = idx.iter().map(|&i| rows[i]).collect();
                (bw, pareto_front(&sub).into_iter().map(|k| idx[k]).collect())
            })
            .collect();
        Self {
            per_bandwidth,
            global: pareto_front(rows),
        }
    }

    pub fn at(&self, bw: u32) -> &[usize] {
        self.per_bandwidth
            .iter()
            .find(|(b, _)| *b == bw)
            .map_or(&[][..], |(_, v)| v.as_slice())
    }

    pub fn flags(&self, n: usize) -> (Vec<bool>, Vec<bool>) {
        let mut local = vec![false; n];
        let mut global = vec![false; n];
        for (_, v) in &self.per_bandwidth {
            for &i in v {
                local[i] = true;
            }
        }
        for &i in &self.global {
            global[i] = true;
        }
        (local, global)
    }
}

/// Fastest frontier design at `bw`, optionally above an area floor.
pub fn fastest(rows: &[DseRow], front: &[usize], min_area: f64) -> Option<DseRow> {
    front
        .iter()
        .map(|&i| rows[i])
        .filter(|r| r.area_mm2 > min_area)
        .min_by(|a, b| a.runtime_ms.total_cmp(&b.runtime_ms))
}

/// A pair of designs differing in one knob where the larger value is slower.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub knob: &'static str,
    pub lower: DesignPoint,
    pub higher: DesignPoint,
    pub lower_ms: f64,
    pub higher_ms: f64,
}

/// Knobs along which runtime must not increase.
pub const MONOTONE_KNOBS: [usize; 6] = [0, 3, 4, 5, 6, 7];

/// Checks runtime is non-increasing along each of `knobs` for every row of
/// a full enumeration of `domains`. Domains must be sorted ascending.
pub fn monotonicity_violations(domains: &KnobDomains, rows: &[DseRow], knobs: &[usize]) -> Vec<Violation> {
    let doms = domains.domains();
    let mut strides = [1usize; 8];
    for k in 1..8 {
        strides[k] = strides[k - 1] * doms[k - 1].len();
    }
    let mut out = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        for &k in knobs {
            let digit = (i / strides[k]) % doms[k].len();
            if digit + 1 >= doms[k].len() {
                continue;
            }
            let hi = &rows[i + strides[k]];
            if hi.runtime_ms > r.runtime_ms * (1.0 + 1e-12) {
                out.push(Violation {
                    knob: KNOB_NAMES[k],
                    lower: r.design,
                    higher: hi.design,
                    lower_ms: r.runtime_ms,
                    higher_ms: hi.runtime_ms,
                });
            }
        }
    }
    out
}

pub const CSV_COLUMNS: [&str; 22] = [
    "schema",
    "index",
    "msm_pes",
    "msm_window",
    "msm_points_per_pe",
    "fracmle_pes",
    "sumcheck_pes",
    "mle_update_pes",
    "modmuls_per_update_pe",
    "bandwidth_gbps",
    "runtime_ms",
    "area_mm2",
    "power_w",
    "pareto_flag",
    "global_pareto_flag",
    "witness_ms",
    "gate_ms",
    "wire_ms",
    "finish_ms",
    "msm_ms",
    "sumcheck_ms",
    "msm_area_mm2",
];

/// Writes rows as CSV with a schema-versioned header. Floats are printed
/// with fixed precision so identical inputs give identical bytes.
pub fn write_csv<W: Write>(out: W, rows: &[DseRow], fronts: &Frontiers) -> Result<(), PerfError> {
    let io = |e: csv::Error| PerfError::Parse(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = CSV_COLUMNS.to_vec();
    header.push("sumcheck_area_mm2");
    w.write_record(&header).map_err(io)?;
    let (local, global) = fronts.flags(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let k = r.design.knobs();
        let mut rec: Vec<String> = vec![DSE_SCHEMA.to_string(), r.index.to_string()];
        rec.extend(k.iter().map(|v| v.to_string()));
        rec.push(format!("{:.6}", r.runtime_ms));
        rec.push(format!("{:.4}", r.area_mm2));
        rec.push(format!("{:.4}", r.power_w));
        rec.push((local[i] as u8).to_string());
        rec.push((global[i] as u8).to_string());
        for v in [r.witness_ms, r.gate_ms, r.wire_ms, r.finish_ms, r.msm_ms, r.sumcheck_ms] {
            rec.push(format!("{v:.6}"));
        }
        rec.push(format!("{:.4}", r.msm_area_mm2));
        rec.push(format!("{:.4}", r.sumcheck_area_mm2));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| PerfError::Parse(e.to_string()))?;
    Ok(())
}
