//! Streaming SumCheck and MLE-update latency.
//!
//! Each round `j` (1-based) pairs up `2^(mu-j)` table entries per operand.
//! The SumCheck PEs consume one pair per cycle each. The update of round `j`
//! needs that round's challenge, so it is a second pass: it reads both halves
//! again and writes one half back. Off-chip traffic per operand per pair is
//! 64 B for the round plus 64 + 32 B for the update.

use serde::Serialize;
use zkspeed_core::sumcheck::CompositionKind;

use crate::costs::CostTables;
use crate::design::DesignPoint;

pub const ENTRY_BYTES: f64 = 32.0;

/// Operands of each composition, and how many of them are on chip (or
/// produced on the fly) when round 1 starts.
pub fn operands(kind: CompositionKind) -> (u32, u32) {
    match kind {
        // eight circuit tables resident, eq built alongside round 1
        CompositionKind::ZeroCheck => (9, 9),
        // wiring tables come from memory; eq built alongside round 1
        CompositionKind::PermCheck => (11, 1),
        // combined tables and eq tables both streamed in by their producers
        CompositionKind::OpenCheck => (12, 12),
    }
}

/// Modmuls the PE spends once per round after accumulation.
pub fn round_tail(kind: CompositionKind, c: &CostTables) -> u64 {
    match kind {
        CompositionKind::ZeroCheck => c.model.zerocheck_tail as u64,
        CompositionKind::PermCheck => c.model.permcheck_tail as u64,
        CompositionKind::OpenCheck => 0,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RoundLatency {
    pub pairs: u64,
    pub sumcheck_compute: u64,
    pub sumcheck_bytes: f64,
    pub update_compute: u64,
    pub update_bytes: f64,
    pub cycles: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SumCheckLatency {
    pub rounds: Vec<RoundLatency>,
    pub cycles: u64,
    pub bytes: f64,
    /// Cycles the SumCheck PEs are busy.
    pub sumcheck_busy: u64,
    /// Cycles the update PEs are busy.
    pub update_busy: u64,
    /// Rounds where memory, not compute, set the latency.
    pub memory_bound_rounds: u32,
}

fn mem_cycles(bytes: f64, bpc: f64) -> u64 {
    (bytes / bpc).ceil() as u64
}

/// Latency of one SumCheck over `2^mu` entries on design `d`.
pub fn sumcheck_latency(mu: u32, kind: CompositionKind, d: &DesignPoint, c: &CostTables) -> SumCheckLatency {
    let (ops, on_chip) = operands(kind);
    let tail = round_tail(kind, c);
    let bpc = d.bytes_per_cycle();
    let pes = d.sumcheck_pes.max(1) as u64;
    let upes = d.mle_update_pes.max(1);
    let mm = d.modmuls_per_update_pe.max(1) as u64;
    let mut out = SumCheckLatency::default();
    for j in 1..=mu {
        let pairs = 1u64 << (mu - j);
        let streamed = if j == 1 { ops - on_chip } else { ops } as f64;
        let sc_compute = pairs.div_ceil(pes) + tail;
        let sc_bytes = streamed * 2.0 * ENTRY_BYTES * pairs as f64;
        let up_compute = ops.div_ceil(upes) as u64 * pairs.div_ceil(mm);
        let up_bytes = (streamed * 2.0 + ops as f64) * ENTRY_BYTES * pairs as f64;
        let sc = sc_compute.max(mem_cycles(sc_bytes, bpc));
        let up = up_compute.max(mem_cycles(up_bytes, bpc));
        if mem_cycles(sc_bytes, bpc) > sc_compute || mem_cycles(up_bytes, bpc) > up_compute {
            out.memory_bound_rounds += 1;
        }
        out.cycles += sc + up;
        out.bytes += sc_bytes + up_bytes;
        out.sumcheck_busy += sc_compute;
        out.update_busy += up_compute;
        out.rounds.push(RoundLatency {
            pairs,
            sumcheck_compute: sc_compute,
            sumcheck_bytes: sc_bytes,
            update_compute: up_compute,
            update_bytes: up_bytes,
            cycles: sc + up,
        });
    }
    out
}
