//! Multi-scalar multiplication: naive oracle, Pippenger bucketing with
//! grouped bucket aggregation, and the sparse variant that sums the points of
//! 1-valued scalars with a tree before running Pippenger on the rest.
//!
//! Every point operation can be logged as `{phase, window, chain, op}`; a
//! chain is a sequence of operations that must run one after another, which
//! is what the cycle model schedules.

use std::collections::HashMap;

use thiserror::Error;

use crate::ec::{Curve, Point};
use crate::fp::{Fe, Field};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MsmError {
    #[error("{scalars} scalars but {points} points")]
    LengthMismatch { scalars: usize, points: usize },
    #[error("window size {0} outside 1..=scalar bit width")]
    BadWindow(u32),
    #[error("group size must be at least 1")]
    BadGroup,
    #[error("scalar does not belong to the curve's scalar field")]
    ForeignScalar,
    #[error("sparsity tally does not match the scalars")]
    BadTally,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Phase {
    /// Adding points into buckets.
    Bucket,
    /// Per-group running sums.
    GroupSum,
    /// Multiplying group sums by their offsets.
    GroupOffset,
    /// Tree sum of group results.
    GroupTree,
    /// Doublings and additions joining windows.
    WindowCombine,
    /// Tree sum of points with scalar 1.
    OnesTree,
    /// Final join of the sparse and dense parts.
    Join,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum OpKind {
    Padd,
    Pdbl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpRecord {
    pub phase: Phase,
    pub op: OpKind,
    pub window: u16,
    pub chain: u32,
}

/// Point-operation log. In counting mode only per-phase totals are kept.
#[derive(Clone, Debug, Default)]
pub struct OpLog {
    detailed: bool,
    records: Vec<OpRecord>,
    counts: HashMap<Phase, u64>,
}

impl OpLog {
    pub fn detailed() -> Self {
        Self {
            detailed: true,
            ..Self::default()
        }
    }

    pub fn counting() -> Self {
        Self::default()
    }

    fn push(&mut self, phase: Phase, op: OpKind, window: u32, chain: u32) {
        *self.counts.entry(phase).or_insert(0) += 1;
        if self.detailed {
            self.records.push(OpRecord {
                phase,
                op,
                window: window as u16,
                chain,
            });
        }
    }

    pub fn records(&self) -> &[OpRecord] {
        &self.records
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn count(&self, phase: Phase) -> u64 {
        self.counts.get(&phase).copied().unwrap_or(0)
    }

    pub fn count_kind(&self, kind: OpKind) -> u64 {
        self.records.iter().filter(|r| r.op == kind).count() as u64
    }

    /// Longest dependent chain: for each `(window, phase)` the longest chain,
    /// summed over phases and windows. Only meaningful for detailed logs.
    pub fn critical_path(&self, phases: &[Phase]) -> u64 {
        let mut per_chain: HashMap<(u16, Phase, u32), u64> = HashMap::new();
        for r in &self.records {
            if phases.contains(&r.phase) {
                *per_chain.entry((r.window, r.phase, r.chain)).or_insert(0) += 1;
            }
        }
        let mut per_phase: HashMap<(u16, Phase), u64> = HashMap::new();
        for ((w, p, _), n) in per_chain {
            let e = per_phase.entry((w, p)).or_insert(0);
            *e = (*e).max(n);
        }
        per_phase.values().sum()
    }
}

/// Counts of zero, one and other scalars.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SparsityTally {
    pub zero: usize,
    pub one: usize,
    pub dense: usize,
}

impl SparsityTally {
    pub fn of(f: &Field, scalars: &[Fe]) -> Self {
        let one = f.one();
        let mut t = Self::default();
        for s in scalars {
            if s.is_zero() {
                t.zero += 1;
            } else if *s == one {
                t.one += 1;
            } else {
                t.dense += 1;
            }
        }
        t
    }

    pub fn len(&self) -> usize {
        self.zero + self.one + self.dense
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PippengerConfig {
    pub window: u32,
    pub group_size: usize,
}

impl PippengerConfig {
    pub fn new(window: u32, group_size: usize) -> Self {
        Self { window, group_size }
    }

    /// Window scaled to the instance: `clamp(log2 n - 3, 2, 16)`, group 16.
    pub fn for_size(n: usize) -> Self {
        let lg = usize::BITS - n.max(1).leading_zeros() - 1;
        Self {
            window: lg.saturating_sub(3).clamp(2, 16),
            group_size: 16,
        }
    }
}

fn check(curve: &Curve, scalars: &[Fe], points: &[Point]) -> Result<(), MsmError> {
    if scalars.len() != points.len() {
        return Err(MsmError::LengthMismatch {
            scalars: scalars.len(),
            points: points.len(),
        });
    }
    let sf = curve.scalar_field();
    if scalars.iter().any(|s| !sf.owns(s)) {
        return Err(MsmError::ForeignScalar);
    }
    Ok(())
}

/// `sum_i [s_i] P_i` by double-and-add per term, in index order.
pub fn msm_naive(curve: &Curve, scalars: &[Fe], points: &[Point]) -> Result<Point, MsmError> {
    check(curve, scalars, points)?;
    let mut acc = curve.identity();
    for (s, p) in scalars.iter().zip(points) {
        if s.is_zero() {
            continue;
        }
        acc = curve.padd(&acc, &curve.scalar_mul(s, p));
    }
    Ok(acc)
}

/// `sum_{i>=1} i * buckets[i-1]`. With `g >= buckets.len()` this is the
/// plain running-sum scheme; otherwise buckets are split into groups of `g`
/// and recombined as `sum_k (L_k + (k g) S_k)` where `L_k` is the
/// group-local weighted sum and `S_k` the group's plain sum.
pub fn aggregate_buckets(curve: &Curve, buckets: &[Point], g: usize, log: &mut OpLog) -> Point {
    aggregate_window(curve, buckets, g, 0, log)
}

fn aggregate_window(curve: &Curve, buckets: &[Point], g: usize, window: u32, log: &mut OpLog) -> Point {
    let g = g.max(1);
    let n = buckets.len();
    if n == 0 {
        return curve.identity();
    }
    let groups = n.div_ceil(g);
    let mut results = Vec::with_capacity(groups);
    for k in 0..groups {
        let lo = k * g;
        let hi = (lo + g).min(n);
        let chain = k as u32;
        // Phase 1: running suffix sums inside the group.
        let mut running = curve.identity();
        let mut local = curve.identity();
        for b in buckets[lo..hi].iter().rev() {
            running = curve.padd(&running, b);
            log.push(Phase::GroupSum, OpKind::Padd, window, chain);
            local = curve.padd(&local, &running);
            log.push(Phase::GroupSum, OpKind::Padd, window, chain);
        }
        // Phase 2: add (k g) * S_k by double-and-add.
        let offset = (k * g) as u64;
        if offset > 0 {
            let mut mult = curve.identity();
            for bit in (0..64 - offset.leading_zeros()).rev() {
                mult = curve.pdbl(&mult);
                log.push(Phase::GroupOffset, OpKind::Pdbl, window, chain);
                if (offset >> bit) & 1 == 1 {
                    mult = curve.padd(&mult, &running);
                    log.push(Phase::GroupOffset, OpKind::Padd, window, chain);
                }
            }
            local = curve.padd(&local, &mult);
            log.push(Phase::GroupOffset, OpKind::Padd, window, chain);
        }
        results.push(local);
    }
    tree_sum(curve, results, Phase::GroupTree, window, log)
}

/// Pairwise reduction; each node continues its left child's chain.
fn tree_sum(curve: &Curve, mut level: Vec<Point>, phase: Phase, window: u32, log: &mut OpLog) -> Point {
    if level.is_empty() {
        return curve.identity();
    }
    let mut chains: Vec<u32> = (0..level.len() as u32).collect();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut next_chains = Vec::with_capacity(next.capacity());
        for (pair, ch) in level.chunks(2).zip(chains.chunks(2)) {
            if pair.len() == 2 {
                next.push(curve.padd(&pair[0], &pair[1]));
                log.push(phase, OpKind::Padd, window, ch[0]);
            } else {
                next.push(pair[0]);
            }
            next_chains.push(ch[0]);
        }
        level = next;
        chains = next_chains;
    }
    level[0]
}

fn window_count(bits: u32, w: u32) -> u32 {
    bits.div_ceil(w)
}

/// Pippenger's bucket method with unsigned `W`-bit windows.
pub fn pippenger(
    curve: &Curve,
    scalars: &[Fe],
    points: &[Point],
    cfg: PippengerConfig,
    log: &mut OpLog,
) -> Result<Point, MsmError> {
    check(curve, scalars, points)?;
    let sf = curve.scalar_field();
    let bits = sf.bit_width();
    if cfg.window == 0 || cfg.window > bits || cfg.window > 24 {
        return Err(MsmError::BadWindow(cfg.window));
    }
    if cfg.group_size == 0 {
        return Err(MsmError::BadGroup);
    }
    let w = cfg.window;
    let windows = window_count(bits, w);
    let canon: Vec<Vec<u64>> = scalars.iter().map(|s| sf.to_canonical_limbs(s)).collect();
    let mut buckets = vec![curve.identity(); (1usize << w) - 1];
    let mut acc = curve.identity();
    for win in (0..windows).rev() {
        for b in buckets.iter_mut() {
            *b = curve.identity();
        }
        for (c, p) in canon.iter().zip(points) {
            let digit = Field::window(c, win * w, w) as usize;
            if digit != 0 {
                buckets[digit - 1] = curve.padd(&buckets[digit - 1], p);
                log.push(Phase::Bucket, OpKind::Padd, win, digit as u32);
            }
        }
        let agg = aggregate_window(curve, &buckets, cfg.group_size, win, log);
        if win + 1 != windows {
            for _ in 0..w {
                acc = curve.pdbl(&acc);
                log.push(Phase::WindowCombine, OpKind::Pdbl, win, 0);
            }
        }
        acc = curve.padd(&acc, &agg);
        log.push(Phase::WindowCombine, OpKind::Padd, win, 0);
    }
    Ok(acc)
}

/// Point operations one [`aggregate_buckets`] call performs on `n` buckets.
pub fn aggregation_ops(n: usize, g: usize) -> u64 {
    let g = g.max(1);
    let groups = n.div_ceil(g);
    let mut ops = 2 * n as u64;
    for k in 1..groups {
        let off = (k * g) as u64;
        ops += (64 - off.leading_zeros()) as u64 + off.count_ones() as u64 + 1;
    }
    ops + groups.saturating_sub(1) as u64
}

/// Closed-form operation count of [`pippenger`] given the nonzero window
/// digits it will see.
pub fn pippenger_ops(f: &Field, scalars: &[Fe], cfg: PippengerConfig) -> u64 {
    let bits = f.bit_width();
    let w = cfg.window;
    let windows = window_count(bits, w) as u64;
    let mut bucket_adds = 0u64;
    for s in scalars {
        let c = f.to_canonical_limbs(s);
        for win in 0..windows as u32 {
            if Field::window(&c, win * w, w) != 0 {
                bucket_adds += 1;
            }
        }
    }
    let agg = aggregation_ops((1usize << w) - 1, cfg.group_size);
    bucket_adds + windows * (agg + 1) + (windows - 1) * w as u64
}

/// Zero scalars are skipped, points of 1-valued scalars are summed by a
/// pairwise tree, and the rest go through [`pippenger`].
pub fn msm_sparse(
    curve: &Curve,
    scalars: &[Fe],
    points: &[Point],
    tally: &SparsityTally,
    cfg: PippengerConfig,
    log: &mut OpLog,
) -> Result<Point, MsmError> {
    check(curve, scalars, points)?;
    let sf = curve.scalar_field();
    if SparsityTally::of(sf, scalars) != *tally {
        return Err(MsmError::BadTally);
    }
    let one = sf.one();
    let mut ones = Vec::with_capacity(tally.one);
    let mut dense_s = Vec::with_capacity(tally.dense);
    let mut dense_p = Vec::with_capacity(tally.dense);
    for (s, p) in scalars.iter().zip(points) {
        if s.is_zero() {
            continue;
        }
        if *s == one {
            ones.push(*p);
        } else {
            dense_s.push(*s);
            dense_p.push(*p);
        }
    }
    let ones_sum = tree_sum(curve, ones, Phase::OnesTree, 0, log);
    if dense_s.is_empty() {
        return Ok(ones_sum);
    }
    let dense = pippenger(curve, &dense_s, &dense_p, cfg, log)?;
    if tally.one == 0 {
        return Ok(dense);
    }
    log.push(Phase::Join, OpKind::Padd, 0, 0);
    Ok(curve.padd(&ones_sum, &dense))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    #[test]
    fn toy_examples() {
        let c = Curve::toy17();
        let s = c.scalar_field().clone();
        let g = c.generator();
        let r = msm_naive(&c, &[s.from_u64(2), s.from_u64(3)], &[g, g]).unwrap();
        assert!(c.eq_points(&r, &c.scalar_mul_int(&BigUint::from(5u32), &g)));
        let zero = msm_naive(&c, &[s.zero(), s.zero()], &[g, g]).unwrap();
        assert!(c.is_identity(&zero));
        assert!(msm_naive(&c, &[s.one()], &[g, g]).is_err());
    }

    #[test]
    fn aggregation_example_w3() {
        let c = Curve::toy17();
        let g = c.generator();
        let buckets: Vec<Point> = (1..=7u32).map(|i| c.scalar_mul_int(&BigUint::from(i), &g)).collect();
        let want = c.scalar_mul_int(&BigUint::from(140u32), &g);
        for grp in [1, 2, 3, 4, 7, 8] {
            let mut log = OpLog::detailed();
            let got = aggregate_buckets(&c, &buckets, grp, &mut log);
            assert!(c.eq_points(&got, &want), "g={grp}");
            assert_eq!(log.total(), aggregation_ops(7, grp));
        }
    }

    #[test]
    fn single_group_is_naive_sequence() {
        let c = Curve::toy17();
        let buckets = vec![c.generator(); 7];
        let mut log = OpLog::detailed();
        aggregate_buckets(&c, &buckets, 7, &mut log);
        assert!(log.records().iter().all(|r| r.phase == Phase::GroupSum && r.chain == 0));
        assert_eq!(log.total(), 14);
    }

    #[test]
    fn window_covering_all_bits() {
        let c = Curve::toy17();
        let s = c.scalar_field().clone();
        let g = c.generator();
        let k = s.from_u64(13);
        let mut log = OpLog::counting();
        let r = pippenger(&c, &[k], &[g], PippengerConfig::new(5, 16), &mut log).unwrap();
        assert!(c.eq_points(&r, &c.scalar_mul(&k, &g)));
    }
}
