//! End-to-end prover latency on one design point.
//!
//! Steps run in order: witness commitments, gate identity, wiring identity,
//! then batch evaluation in parallel with the polynomial opening. Within a
//! step, producers stream into consumers where the dataflow allows it.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;
use zkspeed_core::mle::SparsityProfile;
use zkspeed_core::sumcheck::CompositionKind;

use crate::batch::{batch_latency, BatchParams};
use crate::census::{EVALUATED_TABLES, EVALUATIONS, EVAL_POINTS};
use crate::costs::CostTables;
use crate::design::DesignPoint;
use crate::msm_sim::{MsmJob, MsmSim, MsmTiming};
use crate::rollup::{rollup_unchecked, Rollup};
use crate::sumcheck_model::{sumcheck_latency, SumCheckLatency, ENTRY_BYTES};
use crate::PerfError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Workload {
    pub mu: u32,
    pub sparsity: SparsityProfile,
}

impl Workload {
    pub fn new(mu: u32, sparsity: SparsityProfile) -> Self {
        Self { mu, sparsity }
    }

    pub fn typical(mu: u32) -> Self {
        Self::new(mu, SparsityProfile::typical())
    }

    pub fn gates(&self) -> u64 {
        1 << self.mu
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Step {
    pub cycles: u64,
    pub bytes: f64,
}

/// MSM work of one proof, per step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MsmSteps {
    pub witness: u64,
    pub witness_bytes: f64,
    pub phi: MsmTiming,
    pub pi: MsmTiming,
    pub ladder: u64,
    pub ladder_bytes: f64,
    /// Cycles the PADD pipelines spend on bucket accumulation or trees.
    pub busy: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerfReport {
    pub design: DesignPoint,
    pub mu: u32,
    pub witness: Step,
    pub gate: Step,
    pub wire: Step,
    pub open: Step,
    pub batch_eval: Step,
    /// Final step: batch evaluation alongside the opening.
    pub finish: Step,
    pub sha3_cycles: u64,
    pub msm: MsmSteps,
    pub zerocheck: SumCheckLatency,
    pub permcheck: SumCheckLatency,
    pub opencheck: SumCheckLatency,
    pub eq_build: u64,
    pub fracmle: u64,
    pub product: u64,
    pub combine: u64,
    pub runtime_cycles: u64,
    pub runtime_ms: f64,
    pub area_mm2: f64,
    pub power_w: f64,
    pub rollup: Rollup,
}

impl PerfReport {
    /// MSM cycles on the critical path.
    pub fn msm_cycles(&self) -> u64 {
        self.msm.witness + self.msm.phi.compute() + self.msm.pi.compute() + self.msm.ladder
    }

    pub fn sumcheck_cycles(&self) -> u64 {
        self.zerocheck.cycles + self.permcheck.cycles + self.opencheck.cycles
    }

    pub fn bytes(&self) -> f64 {
        self.witness.bytes + self.gate.bytes + self.wire.bytes + self.finish.bytes
    }

    /// Busy fraction of each unit over the whole proof.
    pub fn utilization(&self) -> Vec<(&'static str, f64)> {
        let t = self.runtime_cycles.max(1) as f64;
        let sc = self.zerocheck.sumcheck_busy + self.permcheck.sumcheck_busy + self.opencheck.sumcheck_busy;
        let up = self.zerocheck.update_busy + self.permcheck.update_busy + self.opencheck.update_busy;
        let bw = self.bytes() / self.design.bytes_per_cycle();
        vec![
            ("msm", self.msm.busy as f64 / t),
            ("sumcheck", sc as f64 / t),
            ("mle_update", up as f64 / t),
            ("fracmle", self.fracmle as f64 / t),
            ("tree", (self.eq_build + self.product) as f64 / t),
            ("mle_combine", self.combine as f64 / t),
            ("memory", bw / t),
        ]
    }
}

type MsmKey = (u32, u32, u32, u32);

/// Evaluates designs against one set of cost tables. Cloning shares the
/// simulation caches.
#[derive(Clone)]
pub struct Model {
    pub costs: CostTables,
    pub sim: MsmSim,
    msm_cache: Arc<Mutex<HashMap<(MsmKey, u32, u64, u64), MsmSteps>>>,
}

fn cycles(bytes: f64, bpc: f64) -> u64 {
    (bytes / bpc).ceil() as u64
}

impl Model {
    pub fn new(costs: CostTables) -> Self {
        let sim = MsmSim::from_costs(&costs);
        Self {
            costs,
            sim,
            msm_cache: Default::default(),
        }
    }

    fn msm_steps(&self, d: &DesignPoint, w: &Workload) -> MsmSteps {
        let n = w.gates();
        let ones = (n as f64 * w.sparsity.one).round() as u64;
        let dense = (n as f64 * w.sparsity.dense).round() as u64;
        let key = (
            (d.msm_pes, d.msm_window, d.msm_points_per_pe, d.bandwidth_gbps),
            w.mu,
            ones,
            dense,
        );
        if let Some(s) = self.msm_cache.lock().expect("cache").get(&key) {
            return *s;
        }
        let witness_job = MsmJob {
            ones,
            dense,
            scalars_on_chip: true,
        };
        let witness = self.sim.sequence(&[witness_job; 3], d);
        let phi = self.sim.simulate(MsmJob::dense(n), d);
        let pi = phi;
        let ladder_jobs: Vec<MsmJob> = (0..w.mu).rev().map(|k| MsmJob::dense(1 << k)).collect();
        let ladder = self.sim.sequence(&ladder_jobs, d);
        let wt = self.sim.simulate(witness_job, d);
        let busy = 3 * (wt.ones_tree + wt.bucket) + phi.bucket + pi.bucket + ladder.bucket;
        let s = MsmSteps {
            witness: witness.cycles,
            witness_bytes: witness.bytes,
            phi,
            pi,
            ladder: ladder.cycles,
            ladder_bytes: ladder.bytes,
            busy,
        };
        self.msm_cache.lock().expect("cache").insert(key, s);
        s
    }

    /// Latency, traffic, area and power of `d` on workload `w`. Knob domains
    /// are not checked here; see [`Model::evaluate_checked`].
    pub fn evaluate(&self, d: &DesignPoint, w: &Workload) -> Result<PerfReport, PerfError> {
        let c = &self.costs;
        let m = &c.model;
        let n = w.gates();
        let nf = n as f64;
        let bpc = d.bytes_per_cycle();
        let lanes = m.tree_lanes as u64;
        let msm = self.msm_steps(d, w);

        // 1. witness commitments
        let witness = Step {
            cycles: msm.witness,
            bytes: msm.witness_bytes,
        };

        // 2. gate identity; eq is built on the tree while round 1 runs
        let eq_build = n.div_ceil(lanes);
        let zerocheck = sumcheck_latency(w.mu, CompositionKind::ZeroCheck, d, c);
        let overlap = |s: &SumCheckLatency, pre: u64| {
            let first = s.rounds.first().map_or(0, |r| r.cycles);
            s.cycles + pre.saturating_sub(first)
        };
        let gate = Step {
            cycles: overlap(&zerocheck, eq_build),
            bytes: zerocheck.bytes,
        };

        // 3. wiring identity: N&D and FracMLE stream into the phi MSM, the
        // product tree follows, then the pi MSM
        let bp = BatchParams::from_costs(c);
        let fill = batch_latency(m.inversion_batch as u64, &bp).occupancy;
        let fracmle = n.div_ceil(d.fracmle_pes.max(1) as u64) + fill;
        let product = n.div_ceil(lanes);
        let phi_front = msm.phi.front().max(cycles(msm.phi.bytes, bpc));
        let pi_front = msm.pi.front().max(cycles(msm.pi.bytes, bpc));
        let phi_done = fracmle.max(phi_front);
        let pi_start = phi_done.max(fracmle + product);
        let wire_core = (pi_start + pi_front + msm.pi.tail()).max(phi_done + msm.phi.tail());
        // N and D parts plus phi and pi are written for the wiring SumCheck.
        let wire_bytes = 8.0 * nf * ENTRY_BYTES + msm.phi.bytes + msm.pi.bytes;
        let permcheck = sumcheck_latency(w.mu, CompositionKind::PermCheck, d, c);
        let wire = Step {
            cycles: wire_core.max(cycles(wire_bytes, bpc)) + overlap(&permcheck, eq_build),
            bytes: wire_bytes + permcheck.bytes,
        };

        // 4 and 5. batch evaluation alongside the opening
        let units = m.batch_eval_units as u64;
        let eval_cycles = EVALUATIONS.div_ceil(units) * n.div_ceil(2);
        let eval_bytes = EVALUATED_TABLES as f64 * nf * ENTRY_BYTES;
        let batch_eval = Step {
            cycles: eval_cycles.max(cycles(eval_bytes, bpc)),
            bytes: eval_bytes,
        };
        let combine_mm = c.sharing.combine_modmuls as u64;
        let combine_in = EVALUATED_TABLES as f64 * nf * ENTRY_BYTES;
        let combine = (EVALUATIONS * n).div_ceil(combine_mm).max(cycles(combine_in, bpc));
        let k_build = EVAL_POINTS * eq_build;
        let opencheck = sumcheck_latency(w.mu, CompositionKind::OpenCheck, d, c);
        let weighted = (EVAL_POINTS * n).div_ceil(combine_mm);
        let open_cycles = combine + overlap(&opencheck, k_build) + weighted + msm.ladder;
        let open = Step {
            cycles: open_cycles,
            bytes: combine_in + opencheck.bytes + msm.ladder_bytes,
        };
        let finish_bytes = open.bytes + batch_eval.bytes;
        let finish = Step {
            cycles: open.cycles.max(batch_eval.cycles).max(cycles(finish_bytes, bpc)),
            bytes: finish_bytes,
        };

        let sha3_cycles = 5 * m.sha3_cycles as u64;
        let runtime_cycles = witness.cycles + gate.cycles + wire.cycles + finish.cycles + sha3_cycles;
        let rollup = rollup_unchecked(d, w.mu, c, true)?;
        Ok(PerfReport {
            design: *d,
            mu: w.mu,
            witness,
            gate,
            wire,
            open,
            batch_eval,
            finish,
            sha3_cycles,
            msm,
            zerocheck,
            permcheck,
            opencheck,
            eq_build,
            fracmle,
            product,
            combine: combine + weighted,
            runtime_cycles,
            runtime_ms: runtime_cycles as f64 / (c.clock_ghz * 1e6),
            area_mm2: rollup.area(),
            power_w: rollup.power(),
            rollup,
        })
    }

    pub fn evaluate_checked(&self, d: &DesignPoint, w: &Workload) -> Result<PerfReport, PerfError> {
        d.validate()?;
        self.evaluate(d, w)
    }
}
