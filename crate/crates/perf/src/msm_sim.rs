//! Cycle-level MSM model.
//!
//! Each PE owns a PADD pipeline (one issue per cycle, depth `D`). Windows are
//! dealt round-robin to PEs and the point stream is broadcast, so every round
//! streams the points once and all PEs in a round advance together.
//!
//! Bucket phase: each PE keeps a reorder buffer of `R` pending points. A
//! point issues into its bucket once the bucket's previous PADD has drained;
//! if no buffered point can issue, two buffered points aimed at the same
//! bucket are added to each other and the sum re-enters the buffer. Either
//! way one PADD retires one pending point, so the op count matches the
//! functional implementation.
//!
//! Aggregation is the grouped scheme of the functional code, list-scheduled
//! per PE over all of its windows. Window combine is a serial Horner chain.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use zkspeed_core::fp::Field;
use zkspeed_core::msm::aggregation_ops;

use crate::costs::CostTables;
use crate::design::DesignPoint;
use crate::sched::{list_schedule, tree_program, Op};

pub const SAMPLE_SEED: u64 = 0x5eed_b0c4;

/// Program for one window's grouped aggregation over `buckets` buckets, in
/// the functional code's op order.
pub fn aggregation_program(buckets: usize, g: usize) -> Vec<Op> {
    let g = g.max(1);
    let mut prog: Vec<Op> = Vec::with_capacity(aggregation_ops(buckets, g) as usize);
    let push = |prog: &mut Vec<Op>, op: Op| {
        prog.push(op);
        prog.len() as u32 - 1
    };
    let groups = buckets.div_ceil(g);
    let mut results = Vec::with_capacity(groups);
    for k in 0..groups {
        let len = g.min(buckets - k * g);
        let mut running: Option<u32> = None;
        let mut local: Option<u32> = None;
        for _ in 0..len {
            let r = push(&mut prog, running.map_or(Op::root(), Op::after));
            running = Some(r);
            let l = push(&mut prog, local.map_or(Op::after(r), |l| Op::join(l, r)));
            local = Some(l);
        }
        let (running, mut local) = (running.expect("non-empty group"), local.expect("non-empty group"));
        let offset = (k * g) as u64;
        if offset > 0 {
            let mut mult: Option<u32> = None;
            for bit in (0..64 - offset.leading_zeros()).rev() {
                mult = Some(push(&mut prog, mult.map_or(Op::root(), Op::after)));
                if (offset >> bit) & 1 == 1 {
                    let m = mult.expect("set above");
                    mult = Some(push(&mut prog, Op::join(m, running)));
                }
            }
            local = push(&mut prog, Op::join(local, mult.expect("offset has bits")));
        }
        results.push(local);
    }
    // Pairwise tree over group results, renumbered into this program.
    let mut level = results;
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        for pair in level.chunks(2) {
            if pair.len() == 2 {
                next.push(push(&mut prog, Op::join(pair[0], pair[1])));
            } else {
                next.push(pair[0]);
            }
        }
        level = next;
    }
    prog
}

/// Cycles to aggregate `windows` windows of `2^w - 1` buckets on one PE.
pub fn aggregation_cycles(w: u32, windows: usize, g: usize, depth: u64) -> u64 {
    if windows == 0 {
        return 0;
    }
    let prog = aggregation_program((1usize << w) - 1, g);
    let progs: Vec<&[Op]> = (0..windows).map(|_| prog.as_slice()).collect();
    list_schedule(&progs, 1, depth).makespan
}

/// Fractional reduction in single-window aggregation latency of group size
/// `g` relative to one running-sum chain.
pub fn aggregation_reduction(w: u32, g: usize, depth: u64) -> f64 {
    let n = (1usize << w) - 1;
    let naive = aggregation_cycles(w, 1, n, depth) as f64;
    let grouped = aggregation_cycles(w, 1, g, depth) as f64;
    1.0 - grouped / naive
}

/// Cycles for one PE to stream `digits` into its buckets; returns
/// (cycles until every bucket holds its final value, PADDs issued).
pub fn bucket_stream(digits: &[u32], buckets: usize, depth: u64, reorder: usize) -> (u64, u64) {
    let reorder = reorder.max(1);
    let mut busy = vec![0u64; buckets + 1];
    let mut buf: Vec<(u32, u64)> = Vec::with_capacity(reorder);
    let mut next = 0usize;
    let mut t = 0u64;
    let mut padds = 0u64;
    while next < digits.len() || !buf.is_empty() {
        if next < digits.len() && buf.len() < reorder {
            let d = digits[next];
            next += 1;
            if d != 0 {
                buf.push((d, t));
            }
        }
        let ready = |e: &(u32, u64)| e.1 <= t;
        if let Some(i) = buf.iter().position(|e| ready(e) && busy[e.0 as usize] <= t) {
            let (d, _) = buf.remove(i);
            busy[d as usize] = t + depth;
            padds += 1;
        } else if let Some((i, j)) = find_pair(&buf, t) {
            buf.remove(j);
            buf[i].1 = t + depth;
            padds += 1;
        }
        t += 1;
    }
    let drained = busy.iter().copied().max().unwrap_or(0);
    (t.max(drained), padds)
}

fn find_pair(buf: &[(u32, u64)], t: u64) -> Option<(usize, usize)> {
    for j in 1..buf.len() {
        if buf[j].1 > t {
            continue;
        }
        for i in 0..j {
            if buf[i].1 <= t && buf[i].0 == buf[j].0 {
                return Some((i, j));
            }
        }
    }
    None
}

/// One MSM: `ones` points with scalar 1, `dense` with uniform scalars.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MsmJob {
    pub ones: u64,
    pub dense: u64,
    /// Scalars already on chip (witness columns); only points are fetched.
    pub scalars_on_chip: bool,
}

impl MsmJob {
    pub fn dense(n: u64) -> Self {
        Self {
            ones: 0,
            dense: n,
            scalars_on_chip: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MsmTiming {
    pub ones_tree: u64,
    pub bucket: u64,
    pub aggregation: u64,
    pub combine: u64,
    pub join: u64,
    /// Points plus scalars fetched from off-chip memory.
    pub bytes: f64,
}

impl MsmTiming {
    pub fn compute(&self) -> u64 {
        self.ones_tree + self.bucket + self.aggregation + self.combine + self.join
    }

    /// Phases that hold the PADD pipelines: the next MSM can only start
    /// after these.
    pub fn front(&self) -> u64 {
        self.ones_tree + self.bucket + self.aggregation
    }

    /// Serial tail that overlaps the next MSM.
    pub fn tail(&self) -> u64 {
        self.combine + self.join
    }

    pub fn aggregation_share(&self) -> f64 {
        let c = self.compute();
        if c == 0 {
            0.0
        } else {
            self.aggregation as f64 / c as f64
        }
    }

    /// Cycles at `bytes_per_cycle`, with memory and compute overlapped.
    pub fn latency(&self, bytes_per_cycle: f64) -> u64 {
        self.compute().max((self.bytes / bytes_per_cycle).ceil() as u64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MsmParams {
    pub depth: u64,
    pub reorder: usize,
    pub group: usize,
    pub sample: usize,
    pub point_bytes: f64,
    pub scalar_bytes: f64,
}

impl MsmParams {
    pub fn from_costs(c: &CostTables) -> Self {
        Self {
            depth: c.model.padd_depth as u64,
            reorder: c.model.reorder_depth as usize,
            group: c.model.group_size as usize,
            sample: c.model.bucket_sample as usize,
            point_bytes: c.point_bytes as f64,
            scalar_bytes: c.scalar_bytes as f64,
        }
    }
}

type Key = (u32, u32, u64);

/// Simulator with memoised per-window bucket timings. Digits come from a
/// fixed sample of uniform BLS12-381 scalars so results are deterministic.
#[derive(Clone)]
pub struct MsmSim {
    pub params: MsmParams,
    scalars: Arc<Vec<Vec<u64>>>,
    bits: u32,
    windows: Arc<Mutex<HashMap<Key, u64>>>,
    aggs: Arc<Mutex<HashMap<(u32, usize, usize), u64>>>,
    trees: Arc<Mutex<HashMap<(u64, u32), u64>>>,
}

impl MsmSim {
    pub fn new(params: MsmParams) -> Self {
        let f = Field::bls12_381_scalar();
        let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
        let scalars = (0..params.sample)
            .map(|_| f.to_canonical_limbs(&f.random(&mut rng)))
            .collect();
        Self {
            params,
            scalars: Arc::new(scalars),
            bits: f.bit_width(),
            windows: Default::default(),
            aggs: Default::default(),
            trees: Default::default(),
        }
    }

    pub fn from_costs(c: &CostTables) -> Self {
        Self::new(MsmParams::from_costs(c))
    }

    pub fn window_count(&self, w: u32) -> u32 {
        self.bits.div_ceil(w)
    }

    /// Bucket cycles for window `win` of width `w` over `n` uniform scalars.
    /// Exact up to the sample size; beyond it, the sample's steady-state
    /// rate is extrapolated.
    pub fn window_cycles(&self, w: u32, win: u32, n: u64) -> u64 {
        if n == 0 {
            return 0;
        }
        let s = self.params.sample as u64;
        let key = (w, win, n.min(s));
        let cached = self.windows.lock().expect("cache").get(&key).copied();
        let base = match cached {
            Some(c) => c,
            None => {
                let digits: Vec<u32> = self.scalars[..n.min(s) as usize]
                    .iter()
                    .map(|c| Field::window(c, win * w, w) as u32)
                    .collect();
                let (c, _) = bucket_stream(&digits, (1 << w) - 1, self.params.depth, self.params.reorder);
                self.windows.lock().expect("cache").insert(key, c);
                c
            }
        };
        if n <= s {
            base
        } else {
            let d = self.params.depth;
            let rate = base.saturating_sub(d) as f64 / s as f64;
            (rate * n as f64).ceil() as u64 + d
        }
    }

    fn aggregation(&self, w: u32, k: usize) -> u64 {
        let key = (w, k, self.params.group);
        if let Some(c) = self.aggs.lock().expect("cache").get(&key) {
            return *c;
        }
        let c = aggregation_cycles(w, k, self.params.group, self.params.depth);
        self.aggs.lock().expect("cache").insert(key, c);
        c
    }

    /// Pairwise tree over `n` points spread across `pes` pipelines.
    pub fn ones_tree(&self, n: u64, pes: u32) -> u64 {
        if n <= 1 {
            return 0;
        }
        if let Some(c) = self.trees.lock().expect("cache").get(&(n, pes)) {
            return *c;
        }
        let prog = tree_program(n as usize);
        let c = list_schedule(&[&prog], pes, self.params.depth).makespan;
        self.trees.lock().expect("cache").insert((n, pes), c);
        c
    }

    /// Dense Pippenger phases on `n` points: (bucket, aggregation, combine).
    pub fn pippenger(&self, n: u64, w: u32, pes: u32) -> (u64, u64, u64) {
        let windows = self.window_count(w);
        let pes = pes.max(1);
        let mut bucket = 0;
        for round in (0..windows).step_by(pes as usize) {
            let hi = (round + pes).min(windows);
            bucket += (round..hi).map(|win| self.window_cycles(w, win, n)).max().unwrap_or(0);
        }
        let k = windows.div_ceil(pes) as usize;
        let aggregation = self.aggregation(w, k);
        let combine = (windows as u64 + (windows as u64 - 1) * w as u64) * self.params.depth;
        (bucket, aggregation, combine)
    }

    /// Simulates one MSM on design `d`.
    pub fn simulate(&self, job: MsmJob, d: &DesignPoint) -> MsmTiming {
        let p = &self.params;
        let pes = d.msm_pes.max(1);
        let ones_tree = self.ones_tree(job.ones, pes);
        let (bucket, aggregation, combine) = if job.dense > 0 {
            self.pippenger(job.dense, d.msm_window, pes)
        } else {
            (0, 0, 0)
        };
        let join = if job.ones > 0 && job.dense > 0 { p.depth } else { 0 };
        let rounds = self.window_count(d.msm_window).div_ceil(pes) as f64;
        let resident = job.ones + job.dense <= pes as u64 * d.msm_points_per_pe as u64;
        let passes = if resident || job.dense == 0 { 1.0 } else { rounds };
        let scalar = if job.scalars_on_chip { 0.0 } else { p.scalar_bytes };
        let bytes = job.ones as f64 * p.point_bytes + job.dense as f64 * passes * (p.point_bytes + scalar);
        MsmTiming {
            ones_tree,
            bucket,
            aggregation,
            combine,
            join,
            bytes,
        }
    }

    /// Back-to-back MSMs: each one's combine tail overlaps the next one's
    /// bucket and aggregation phases.
    pub fn sequence(&self, jobs: &[MsmJob], d: &DesignPoint) -> MsmSequence {
        let bpc = d.bytes_per_cycle();
        let mut front_end = 0u64;
        let mut end = 0u64;
        let mut out = MsmSequence::default();
        for job in jobs {
            let t = self.simulate(*job, d);
            let front = t.front().max((t.bytes / bpc).ceil() as u64);
            front_end += front;
            end = end.max(front_end) + t.tail();
            out.aggregation += t.aggregation;
            out.bucket += t.bucket;
            out.bytes += t.bytes;
        }
        out.cycles = end;
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MsmSequence {
    pub cycles: u64,
    pub bucket: u64,
    pub aggregation: u64,
    pub bytes: f64,
}

impl MsmSequence {
    pub fn aggregation_share(&self) -> f64 {
        if self.cycles == 0 {
            0.0
        } else {
            self.aggregation as f64 / self.cycles as f64
        }
    }
}

/// Standalone cycle count of one MSM of `n` points with `ones` 1-scalars
/// and `zeros` 0-scalars among them.
pub fn msm_cycle_sim(n: u64, ones: u64, zeros: u64, d: &DesignPoint, c: &CostTables) -> u64 {
    let sim = MsmSim::from_costs(c);
    let job = MsmJob {
        ones,
        dense: n.saturating_sub(ones + zeros),
        scalars_on_chip: false,
    };
    sim.simulate(job, d).latency(d.bytes_per_cycle())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn program_matches_functional_op_count() {
        for w in 2..=10u32 {
            for g in [1usize, 3, 16, 1 << w] {
                let n = (1usize << w) - 1;
                assert_eq!(
                    aggregation_program(n, g).len() as u64,
                    aggregation_ops(n, g),
                    "w={w} g={g}"
                );
            }
        }
    }

    #[test]
    fn bucket_stream_retires_every_nonzero_digit() {
        let digits: Vec<u32> = (0..1000u32).map(|i| (i * 7919) % 8).collect();
        let nz = digits.iter().filter(|d| **d != 0).count() as u64;
        let (cycles, padds) = bucket_stream(&digits, 7, 64, 64);
        assert_eq!(padds, nz);
        // Seven buckets alone would allow only 7 issues per 64 cycles.
        assert!(cycles < 2 * digits.len() as u64, "{cycles}");
    }

    #[test]
    fn conflict_free_stream_runs_at_one_per_cycle() {
        let digits: Vec<u32> = (0..500u32).map(|i| i % 500 + 1).collect();
        let (cycles, _) = bucket_stream(&digits, 511, 64, 16);
        assert_eq!(cycles, 500 - 1 + 64);
    }
}
