//! Dense multilinear-extension tables and the tree kernels built on them.
//!
//! Index convention: entry `i` holds the value at the hypercube point whose
//! variable `x_1` is bit 0 of `i` (LSB first), so `i = sum_j x_j 2^(j-1)`.
//! [`fix_variable`] therefore binds `x_1` by folding adjacent pairs.

use thiserror::Error;

use crate::fp::{Fe, Field, FieldError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MleError {
    #[error("table length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("table has no variables to fix")]
    NoVariables,
    #[error("point has {got} coordinates, table has {want} variables")]
    DimensionMismatch { want: usize, got: usize },
    #[error("challenge vector is empty")]
    EmptyChallenges,
    #[error("stream supplied {got} elements, expected {want}")]
    StreamLength { want: usize, got: usize },
    #[error("hardware parallelism {0} must be a power of two")]
    BadParallelism(usize),
    #[error("sparsity fractions must lie in [0,1] and sum to 1")]
    BadSparsity,
    #[error("malformed table encoding: {0}")]
    Encoding(&'static str),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MleTable {
    num_vars: usize,
    entries: Vec<Fe>,
}

impl MleTable {
    pub fn new(entries: Vec<Fe>) -> Result<Self, MleError> {
        let n = entries.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(MleError::NotPowerOfTwo(n));
        }
        Ok(Self {
            num_vars: n.trailing_zeros() as usize,
            entries,
        })
    }

    pub fn from_u64s(f: &Field, vals: &[u64]) -> Result<Self, MleError> {
        Self::new(vals.iter().map(|&v| f.from_u64(v)).collect())
    }

    pub fn zeros(f: &Field, num_vars: usize) -> Self {
        Self {
            num_vars,
            entries: vec![f.zero(); 1 << num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Fe] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Fe] {
        &mut self.entries
    }

    pub fn into_entries(self) -> Vec<Fe> {
        self.entries
    }

    pub fn get(&self, i: usize) -> Fe {
        self.entries[i]
    }

    /// Canonical values, for tests and printing.
    pub fn to_u64s(&self, f: &Field) -> Vec<u64> {
        self.entries.iter().map(|e| f.to_u64_lossy(e)).collect()
    }

    /// `u64` little-endian count, then each entry as a fixed-width canonical
    /// little-endian scalar.
    pub fn encode(&self, f: &Field) -> Vec<u8> {
        let w = f.byte_len();
        let mut out = Vec::with_capacity(8 + w * self.len());
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        for e in &self.entries {
            out.extend_from_slice(&f.to_bytes_le(e));
        }
        out
    }

    pub fn decode(f: &Field, bytes: &[u8]) -> Result<Self, MleError> {
        if bytes.len() < 8 {
            return Err(MleError::Encoding("missing length prefix"));
        }
        let count = u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes"));
        let w = f.byte_len();
        let body = &bytes[8..];
        if count == 0 || !count.is_power_of_two() || count > (1 << 40) {
            return Err(MleError::Encoding("count is not a power of two"));
        }
        if (body.len() as u64) != count.saturating_mul(w as u64) {
            return Err(MleError::Encoding("body length does not match count"));
        }
        let entries = body
            .chunks_exact(w)
            .map(|c| f.from_bytes_le(c))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(entries)
    }
}

/// Target mix of zero, one and full-width values in witness tables.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SparsityProfile {
    pub zero: f64,
    pub one: f64,
    pub dense: f64,
}

impl SparsityProfile {
    pub fn new(zero: f64, one: f64, dense: f64) -> Result<Self, MleError> {
        let p = Self { zero, one, dense };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), MleError> {
        let ok = [self.zero, self.one, self.dense]
            .iter()
            .all(|v| v.is_finite() && (0.0..=1.0).contains(v))
            && (self.zero + self.one + self.dense - 1.0).abs() < 1e-9;
        if ok {
            Ok(())
        } else {
            Err(MleError::BadSparsity)
        }
    }

    /// 45% zeros, 45% ones, 10% dense.
    pub fn typical() -> Self {
        Self {
            zero: 0.45,
            one: 0.45,
            dense: 0.10,
        }
    }

    pub fn dense_only() -> Self {
        Self {
            zero: 0.0,
            one: 0.0,
            dense: 1.0,
        }
    }
}

/// Binds `x_1 := r`: `t'[i] = (t[2i+1] - t[2i]) r + t[2i]`, one modmul per output.
pub fn fix_variable(f: &Field, t: &MleTable, r: &Fe) -> Result<MleTable, MleError> {
    if t.num_vars == 0 {
        return Err(MleError::NoVariables);
    }
    let mut v = t.entries.clone();
    fix_variable_in_place(f, &mut v, r);
    MleTable::new(v)
}

/// In-place fold of a power-of-two slice; truncates `v` to half its length.
pub fn fix_variable_in_place(f: &Field, v: &mut Vec<Fe>, r: &Fe) {
    let half = v.len() / 2;
    for i in 0..half {
        let lo = v[2 * i];
        let hi = v[2 * i + 1];
        v[i] = f.add(&f.mul(&f.sub(&hi, &lo), r), &lo);
    }
    v.truncate(half);
}

/// Table of `eq(x; r) = prod_j ((1 - r_j)(1 - x_j) + r_j x_j)`.
///
/// Layer 1 is `[1 - r_1, r_1]` (no multiplication); adding variable `j`
/// multiplies every entry by `1 - r_j` and by `r_j`, appending the second
/// half after the first. Total cost is `2^(mu+1) - 4` modmuls.
pub fn build_eq(f: &Field, r: &[Fe]) -> Result<MleTable, MleError> {
    if r.is_empty() {
        return Err(MleError::EmptyChallenges);
    }
    let mut t = Vec::with_capacity(1 << r.len());
    t.push(f.sub(&f.one(), &r[0]));
    t.push(r[0]);
    for rj in &r[1..] {
        let one_minus = f.sub(&f.one(), rj);
        let n = t.len();
        t.reserve(n);
        for i in 0..n {
            let e = t[i];
            t.push(f.mul(&e, rj));
            t[i] = f.mul(&e, &one_minus);
        }
    }
    MleTable::new(t)
}

/// Multilinear extension of `t` at `point`, folding `x_1` first.
pub fn evaluate(f: &Field, t: &MleTable, point: &[Fe]) -> Result<Fe, MleError> {
    if point.len() != t.num_vars {
        return Err(MleError::DimensionMismatch {
            want: t.num_vars,
            got: point.len(),
        });
    }
    let mut v = t.entries.clone();
    for r in point {
        fix_variable_in_place(f, &mut v, r);
    }
    Ok(v[0])
}

/// `sum_i t[i] eq_i(point)`, the inner-product form of [`evaluate`].
pub fn evaluate_via_eq(f: &Field, t: &MleTable, point: &[Fe]) -> Result<Fe, MleError> {
    if point.len() != t.num_vars {
        return Err(MleError::DimensionMismatch {
            want: t.num_vars,
            got: point.len(),
        });
    }
    if point.is_empty() {
        return Ok(t.entries[0]);
    }
    let eq = build_eq(f, point)?;
    Ok(t.entries
        .iter()
        .zip(eq.entries())
        .fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b))))
}

/// All internal layers of the binary product tree over `leaves`, the layer
/// adjacent to the leaves first and the single root last. `n - 1` modmuls.
pub fn product_tree(f: &Field, leaves: &[Fe]) -> Result<Vec<Vec<Fe>>, MleError> {
    let n = leaves.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(MleError::NotPowerOfTwo(n));
    }
    let mut layers: Vec<Vec<Fe>> = Vec::new();
    let mut cur = leaves;
    while cur.len() > 1 {
        let next: Vec<Fe> = cur.chunks_exact(2).map(|p| f.mul(&p[0], &p[1])).collect();
        layers.push(next);
        cur = layers.last().expect("just pushed");
    }
    Ok(layers)
}

/// Which of the three multifunction-tree dataflows to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreePattern {
    /// Expand challenges `r_1..r_mu` into the `2^mu` eq entries.
    Forward,
    /// Multiply `n` leaves down to their product.
    Reduce,
    /// Like `Reduce`, but emit every internal node with its layer label.
    Product,
}

/// A streamed tree output. `layer` counts from the leaves (`0` for leaves
/// produced by the forward pattern, `1` for the first product layer).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Labeled {
    pub layer: usize,
    pub index: usize,
    pub value: Fe,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StreamStats {
    /// Largest number of field elements held at once (block buffer plus stack).
    pub max_working_set: usize,
    /// Input elements consumed per step.
    pub inputs_per_step: usize,
    pub steps: usize,
    pub modmuls: u64,
}

#[derive(Clone, Debug)]
pub struct StreamOutput {
    pub items: Vec<Labeled>,
    pub stats: StreamStats,
}

/// Depth-first streaming evaluation of a tree pattern with a hardware block
/// of `p` lanes. Inputs are consumed in order and intermediate layers are
/// never materialised; `stats.max_working_set <= p + 2 log2 n`.
///
/// For `Forward`, `input` is the challenge vector and items come out in
/// table-index order. For `Reduce`, the single item is the root. For
/// `Product`, items are all internal nodes in completion order.
pub fn stream_dfs<I>(f: &Field, pattern: TreePattern, input: I, n: usize, p: usize) -> Result<StreamOutput, MleError>
where
    I: IntoIterator<Item = Fe>,
{
    if p == 0 || !p.is_power_of_two() {
        return Err(MleError::BadParallelism(p));
    }
    match pattern {
        TreePattern::Forward => {
            let r: Vec<Fe> = input.into_iter().collect();
            if r.len() != n {
                return Err(MleError::StreamLength { want: n, got: r.len() });
            }
            stream_forward(f, &r, p)
        }
        TreePattern::Reduce | TreePattern::Product => stream_products(f, input, n, p, pattern == TreePattern::Product),
    }
}

fn stream_products<I>(f: &Field, input: I, n: usize, p: usize, emit_all: bool) -> Result<StreamOutput, MleError>
where
    I: IntoIterator<Item = Fe>,
{
    if n < 2 || !n.is_power_of_two() {
        return Err(MleError::NotPowerOfTwo(n));
    }
    let p = p.clamp(2, n);
    let block_layers = p.trailing_zeros() as usize;
    let mut stats = StreamStats {
        inputs_per_step: p,
        ..StreamStats::default()
    };
    let mut items = Vec::new();
    // (layer, index, value); layers on the stack strictly decrease upward.
    let mut stack: Vec<(usize, usize, Fe)> = Vec::new();
    let mut block: Vec<Fe> = Vec::with_capacity(p);
    let mut consumed = 0usize;
    let mut it = input.into_iter();

    loop {
        block.clear();
        for x in it.by_ref().take(p) {
            block.push(x);
        }
        if block.is_empty() {
            break;
        }
        if block.len() != p {
            return Err(MleError::StreamLength {
                want: n,
                got: consumed + block.len(),
            });
        }
        let block_index = consumed / p;
        consumed += p;
        if consumed > n {
            return Err(MleError::StreamLength { want: n, got: consumed });
        }
        stats.steps += 1;
        stats.max_working_set = stats.max_working_set.max(block.len() + stack.len());

        // Collapse the block in place, layer by layer.
        let mut width = p;
        for layer in 1..=block_layers {
            width /= 2;
            for j in 0..width {
                let v = f.mul(&block[2 * j], &block[2 * j + 1]);
                stats.modmuls += 1;
                block[j] = v;
                if emit_all {
                    items.push(Labeled {
                        layer,
                        index: block_index * width + j,
                        value: v,
                    });
                }
            }
        }
        let mut node = (block_layers, block_index, block[0]);
        while let Some(&(l, idx, v)) = stack.last() {
            if l != node.0 {
                break;
            }
            stack.pop();
            let merged = f.mul(&v, &node.2);
            stats.modmuls += 1;
            node = (l + 1, idx / 2, merged);
            if emit_all {
                items.push(Labeled {
                    layer: node.0,
                    index: node.1,
                    value: merged,
                });
            }
        }
        stack.push(node);
        stats.max_working_set = stats.max_working_set.max(1 + stack.len());
    }
    if consumed != n {
        return Err(MleError::StreamLength { want: n, got: consumed });
    }
    let root = stack.pop().expect("non-empty stream");
    debug_assert!(stack.is_empty());
    if !emit_all {
        items.push(Labeled {
            layer: root.0,
            index: 0,
            value: root.2,
        });
    }
    Ok(StreamOutput { items, stats })
}

fn stream_forward(f: &Field, r: &[Fe], p: usize) -> Result<StreamOutput, MleError> {
    let mu = r.len();
    if mu == 0 {
        return Err(MleError::EmptyChallenges);
    }
    let n = 1usize << mu;
    let p = p.clamp(2, n);
    // The last `k` variables (x_1..x_k) are expanded as one block of p leaves.
    let k = p.trailing_zeros() as usize;
    let one = f.one();
    let mut stats = StreamStats {
        inputs_per_step: 1,
        ..StreamStats::default()
    };
    let mut items = Vec::with_capacity(n);
    let mut block = vec![f.zero(); p];

    // DFS over x_mu, ..., x_{k+1}. Stack entries are (bound high variables,
    // index prefix, partial product); `None` marks the root.
    let mut stack: Vec<(usize, usize, Option<Fe>)> = vec![(0, 0, None)];
    while let Some((depth, prefix, val)) = stack.pop() {
        if depth == mu - k {
            // Expand x_1..x_k into the block; position bit j-1 holds x_j.
            let mut width = 1;
            if let Some(v) = val {
                block[0] = v;
            }
            let mut started = val.is_some();
            for rj in &r[..k] {
                let om = f.sub(&one, rj);
                for e in 0..width {
                    if started {
                        let v = block[e];
                        block[e + width] = f.mul(&v, rj);
                        block[e] = f.mul(&v, &om);
                        stats.modmuls += 2;
                    } else {
                        block[e + width] = *rj;
                        block[e] = om;
                    }
                }
                started = true;
                width *= 2;
            }
            stats.max_working_set = stats.max_working_set.max(p + stack.len());
            for (idx, value) in block.iter().enumerate() {
                items.push(Labeled {
                    layer: 0,
                    index: (prefix << k) | idx,
                    value: *value,
                });
            }
            stats.steps += 1;
            continue;
        }
        // Bind variable x_{mu - depth} (index j = mu - depth - 1).
        let j = mu - depth - 1;
        let rj = &r[j];
        let (v0, v1) = match val {
            None => (f.sub(&one, rj), *rj),
            Some(v) => {
                stats.modmuls += 2;
                (f.mul(&v, &f.sub(&one, rj)), f.mul(&v, rj))
            }
        };
        // Push the 1-branch first so the 0-branch (lower indices) pops first.
        stack.push((depth + 1, (prefix << 1) | 1, Some(v1)));
        stack.push((depth + 1, prefix << 1, Some(v0)));
        stats.max_working_set = stats.max_working_set.max(stack.len());
    }
    Ok(StreamOutput { items, stats })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f17() -> Field {
        Field::from_u64_modulus(17).unwrap()
    }

    fn f97() -> Field {
        Field::from_u64_modulus(97).unwrap()
    }

    #[test]
    fn fix_variable_examples() {
        let f = f17();
        let t = MleTable::from_u64s(&f, &[1, 2, 3, 4]).unwrap();
        for (r, want) in [(0, [1, 3]), (1, [2, 4]), (2, [3, 5])] {
            let out = fix_variable(&f, &t, &f.from_u64(r)).unwrap();
            assert_eq!(out.to_u64s(&f), want);
        }
        let scalar = MleTable::from_u64s(&f, &[5]).unwrap();
        assert_eq!(fix_variable(&f, &scalar, &f.one()), Err(MleError::NoVariables));
    }

    #[test]
    fn build_eq_examples() {
        let f = f17();
        let r = [f.from_u64(3), f.from_u64(5)];
        let eq = build_eq(&f, &r).unwrap();
        assert_eq!(eq.to_u64s(&f), [8, 5, 7, 15]);
        let one = build_eq(&f, &[f.from_u64(4)]).unwrap();
        assert_eq!(one.to_u64s(&f), [14, 4]);
        assert_eq!(build_eq(&f, &[]), Err(MleError::EmptyChallenges));
    }

    #[test]
    fn evaluate_examples() {
        let f = f17();
        let t = MleTable::from_u64s(&f, &[1, 2, 3, 4]).unwrap();
        let at = |a: u64, b: u64| f.to_u64_lossy(&evaluate(&f, &t, &[f.from_u64(a), f.from_u64(b)]).unwrap());
        assert_eq!(at(0, 0), 1);
        assert_eq!(at(1, 1), 4);
        assert_eq!(at(2, 2), 7);
        assert!(matches!(
            evaluate(&f, &t, &[f.one()]),
            Err(MleError::DimensionMismatch { want: 2, got: 1 })
        ));
    }

    #[test]
    fn product_tree_examples() {
        let f = f97();
        let leaves: Vec<Fe> = [2, 3, 4, 5].iter().map(|&v| f.from_u64(v)).collect();
        let layers = product_tree(&f, &leaves).unwrap();
        let vals: Vec<Vec<u64>> = layers
            .iter()
            .map(|l| l.iter().map(|e| f.to_u64_lossy(e)).collect())
            .collect();
        assert_eq!(vals, vec![vec![6, 20], vec![23]]);
        assert!(product_tree(&f, &leaves[..3]).is_err());
        assert!(product_tree(&f, &leaves[..1]).is_err());
    }

    #[test]
    fn stream_reduce_example() {
        let f = f97();
        let leaves: Vec<Fe> = (1..=8).map(|v| f.from_u64(v)).collect();
        for p in [2, 4, 8] {
            let out = stream_dfs(&f, TreePattern::Reduce, leaves.clone(), 8, p).unwrap();
            assert_eq!(out.items.len(), 1);
            // 8! = 40320 = 415 * 97 + 65
            assert_eq!(f.to_u64_lossy(&out.items[0].value), 65);
            assert_eq!(out.stats.modmuls, 7);
        }
        assert!(matches!(
            stream_dfs(&f, TreePattern::Reduce, leaves[..6].to_vec(), 8, 2),
            Err(MleError::StreamLength { .. })
        ));
        assert!(stream_dfs(&f, TreePattern::Reduce, leaves.clone(), 4, 2).is_err());
    }

    #[test]
    fn stream_product_labels() {
        let f = f97();
        let leaves: Vec<Fe> = [2, 3, 4, 5].iter().map(|&v| f.from_u64(v)).collect();
        let out = stream_dfs(&f, TreePattern::Product, leaves, 4, 2).unwrap();
        let mut got: Vec<(usize, usize, u64)> = out
            .items
            .iter()
            .map(|l| (l.layer, l.index, f.to_u64_lossy(&l.value)))
            .collect();
        got.sort();
        assert_eq!(got, vec![(1, 0, 6), (1, 1, 20), (2, 0, 23)]);
    }

    #[test]
    fn stream_forward_matches_build_eq() {
        let f = f17();
        let r = [f.from_u64(3), f.from_u64(5)];
        let out = stream_dfs(&f, TreePattern::Forward, r, 2, 2).unwrap();
        let vals: Vec<u64> = out.items.iter().map(|l| f.to_u64_lossy(&l.value)).collect();
        assert_eq!(vals, [8, 5, 7, 15]);
    }

    #[test]
    fn codec_round_trip() {
        let f = f97();
        let t = MleTable::from_u64s(&f, &[1, 2, 3, 96]).unwrap();
        let bytes = t.encode(&f);
        assert_eq!(bytes.len(), 8 + 4);
        assert_eq!(MleTable::decode(&f, &bytes).unwrap(), t);
        let mut bad = bytes.clone();
        bad[8] = 97;
        assert!(MleTable::decode(&f, &bad).is_err());
        assert!(MleTable::decode(&f, &bytes[..10]).is_err());
    }

    #[test]
    fn sparsity_validation() {
        assert!(SparsityProfile::new(0.45, 0.45, 0.1).is_ok());
        assert!(SparsityProfile::new(0.5, 0.5, 0.1).is_err());
        assert!(SparsityProfile::new(-0.1, 1.0, 0.1).is_err());
    }
}
