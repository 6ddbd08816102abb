//! Synthetic gate traces with a target witness sparsity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha3::{Digest, Sha3_256};

use crate::fp::{Fe, Field};
use crate::mle::{MleError, SparsityProfile};

use super::ProverError;

/// Workload description as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workload {
    pub mu: u32,
    pub sparsity: SparsityProfile,
    pub seed: u64,
    #[serde(default = "default_wiring")]
    pub wiring_fraction: f64,
}

fn default_wiring() -> f64 {
    0.5
}

impl Workload {
    pub fn validate(&self) -> Result<(), ProverError> {
        self.sparsity.validate()?;
        if !(2..=30).contains(&self.mu) {
            return Err(ProverError::BadWorkload(format!("mu {} outside 2..=30", self.mu)));
        }
        if !(0.0..=1.0).contains(&self.wiring_fraction) {
            return Err(ProverError::BadWorkload("wiring_fraction outside [0,1]".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, ProverError> {
        let w: Workload = serde_json::from_str(text).map_err(|e| ProverError::BadWorkload(e.to_string()))?;
        w.validate()?;
        Ok(w)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// Gate selectors, witnesses and copy permutation for `2^mu` gates.
#[derive(Clone, Debug)]
pub struct MockCircuit {
    pub mu: usize,
    pub ql: Vec<Fe>,
    pub qr: Vec<Fe>,
    pub qm: Vec<Fe>,
    pub qo: Vec<Fe>,
    pub qc: Vec<Fe>,
    pub w: [Vec<Fe>; 3],
    pub sigma: [Vec<Fe>; 3],
    pub id: [Vec<Fe>; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Class {
    Zero,
    One,
    Dense,
}

fn classify(f: &Field, x: &Fe) -> Class {
    if x.is_zero() {
        Class::Zero
    } else if *x == f.one() {
        Class::One
    } else {
        Class::Dense
    }
}

fn sample_class<R: Rng>(rng: &mut R, p: &SparsityProfile) -> Class {
    let u: f64 = rng.gen();
    if u < p.zero {
        Class::Zero
    } else if u < p.zero + p.one {
        Class::One
    } else {
        Class::Dense
    }
}

fn sample_value<R: Rng>(f: &Field, rng: &mut R, c: Class) -> Fe {
    match c {
        Class::Zero => f.zero(),
        Class::One => f.one(),
        Class::Dense => loop {
            let x = f.random(rng);
            if classify(f, &x) == Class::Dense {
                return x;
            }
        },
    }
}

/// Union-find over wire slots.
struct Slots {
    parent: Vec<usize>,
}

impl Slots {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[rb] = ra;
        }
    }
}

/// Generates a trace whose gate identity holds at every index and whose
/// `sigma` cycles exactly the copied wires.
///
/// Each gate picks a class for `w3` from the profile and samples `w1`, `w2`
/// (each copied from an earlier gate's output with probability
/// `wiring_fraction`). It becomes an add gate if `w1 + w2` has the target
/// class (unless both inputs are 1), a mul gate if `w1 * w2` does, and
/// otherwise a constant gate `q_O = 1, q_c = w3`.
pub fn gen_mock_circuit(
    f: &Field,
    mu: usize,
    sparsity: &SparsityProfile,
    seed: u64,
    wiring_fraction: f64,
) -> Result<MockCircuit, ProverError> {
    sparsity
        .validate()
        .map_err(|_: MleError| ProverError::BadWorkload("sparsity".into()))?;
    if mu < 2 {
        return Err(ProverError::BadWorkload("mu must be at least 2".into()));
    }
    let n = 1usize << mu;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = f.zero();
    let one = f.one();
    let mut c = MockCircuit {
        mu,
        ql: vec![zero; n],
        qr: vec![zero; n],
        qm: vec![zero; n],
        qo: vec![zero; n],
        qc: vec![zero; n],
        w: std::array::from_fn(|_| vec![zero; n]),
        sigma: std::array::from_fn(|_| Vec::new()),
        id: crate::permwire::identity_tables(f, n),
    };
    let mut slots = Slots::new(3 * n);

    for i in 0..n {
        let target = sample_class(&mut rng, sparsity);
        let mut inputs = [zero; 2];
        for (col, input) in inputs.iter_mut().enumerate() {
            if i > 0 && rng.gen::<f64>() < wiring_fraction {
                let j = rng.gen_range(0..i);
                *input = c.w[2][j];
                slots.union(2 * n + j, col * n + i);
            } else {
                let cl = sample_class(&mut rng, sparsity);
                *input = sample_value(f, &mut rng, cl);
            }
        }
        let [a, b] = inputs;
        let sum = f.add(&a, &b);
        let prod = f.mul(&a, &b);
        // 1 + 1 = 2 is not a full-width value; keep dense outputs uniform.
        let small_sum = a == one && b == one;
        let out = if classify(f, &sum) == target && !small_sum {
            c.ql[i] = one;
            c.qr[i] = one;
            c.qo[i] = one;
            sum
        } else if classify(f, &prod) == target {
            c.qm[i] = one;
            c.qo[i] = one;
            prod
        } else {
            let v = sample_value(f, &mut rng, target);
            c.qo[i] = one;
            c.qc[i] = v;
            v
        };
        c.w[0][i] = a;
        c.w[1][i] = b;
        c.w[2][i] = out;
    }

    // sigma: rotate each copy class by one position.
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); 3 * n];
    for s in 0..3 * n {
        let r = slots.find(s);
        classes[r].push(s);
    }
    let mut sigma = vec![0usize; 3 * n];
    for cls in classes.iter().filter(|c| !c.is_empty()) {
        for (k, &s) in cls.iter().enumerate() {
            sigma[s] = cls[(k + 1) % cls.len()];
        }
    }
    c.sigma = std::array::from_fn(|col| (0..n).map(|i| f.from_u64(sigma[col * n + i] as u64)).collect());
    Ok(c)
}

impl MockCircuit {
    pub fn num_gates(&self) -> usize {
        1 << self.mu
    }

    /// `qL w1 + qR w2 + qM w1 w2 - qO w3 + qc` at gate `i`.
    pub fn gate_residual(&self, f: &Field, i: usize) -> Fe {
        let (a, b, o) = (&self.w[0][i], &self.w[1][i], &self.w[2][i]);
        let mut r = f.mul(&self.ql[i], a);
        r = f.add(&r, &f.mul(&self.qr[i], b));
        r = f.add(&r, &f.mul(&self.qm[i], &f.mul(a, b)));
        r = f.sub(&r, &f.mul(&self.qo[i], o));
        f.add(&r, &self.qc[i])
    }

    /// Hash binding the public part of the circuit (selectors and sigma).
    pub fn digest(&self, f: &Field) -> [u8; 32] {
        let mut h = Sha3_256::new();
        h.update((self.mu as u32).to_be_bytes());
        for t in [&self.ql, &self.qr, &self.qm, &self.qo, &self.qc]
            .into_iter()
            .chain(self.sigma.iter())
        {
            for x in t {
                h.update(f.to_bytes_le(x));
            }
        }
        h.finalize().into()
    }

    /// Realised zero, one and dense fractions over the three witness tables.
    pub fn witness_sparsity(&self, f: &Field) -> SparsityProfile {
        let mut counts = [0usize; 3];
        for t in &self.w {
            for x in t {
                counts[classify(f, x) as usize] += 1;
            }
        }
        let total = (3 * self.num_gates()) as f64;
        SparsityProfile {
            zero: counts[0] as f64 / total,
            one: counts[1] as f64 / total,
            dense: counts[2] as f64 / total,
        }
    }

    /// Adds one to `w3` at gate `i`, breaking its gate identity.
    pub fn corrupt_gate(&mut self, f: &Field, i: usize) {
        self.w[2][i] = f.add(&self.w[2][i], &f.one());
    }

    /// Swaps the sigma images of slots `a` and `b` (slot = column * n + gate).
    pub fn transpose_sigma(&mut self, a: usize, b: usize) {
        let n = self.num_gates();
        let (ca, ia, cb, ib) = (a / n, a % n, b / n, b % n);
        let va = self.sigma[ca][ia];
        self.sigma[ca][ia] = self.sigma[cb][ib];
        self.sigma[cb][ib] = va;
    }

    pub fn slot_value(&self, s: usize) -> Fe {
        let n = self.num_gates();
        self.w[s / n][s % n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_add_zero_circuit() {
        let f = Field::bls12_381_scalar();
        let c = gen_mock_circuit(&f, 2, &SparsityProfile::new(1.0, 0.0, 0.0).unwrap(), 1, 0.0).unwrap();
        for i in 0..4 {
            assert_eq!(c.ql[i], f.one());
            assert_eq!(c.qr[i], f.one());
            assert_eq!(c.qo[i], f.one());
            assert!(c.qm[i].is_zero() && c.qc[i].is_zero());
            assert!(c.w.iter().all(|t| t[i].is_zero()));
            assert!(c.gate_residual(&f, i).is_zero());
        }
    }

    #[test]
    fn gate_identity_holds() {
        let f = Field::bls12_381_scalar();
        let c = gen_mock_circuit(&f, 4, &SparsityProfile::typical(), 7, 0.5).unwrap();
        for i in 0..16 {
            assert!(c.gate_residual(&f, i).is_zero());
        }
    }

    #[test]
    fn workload_json_round_trip() {
        let w = Workload {
            mu: 8,
            sparsity: SparsityProfile::typical(),
            seed: 3,
            wiring_fraction: 0.25,
        };
        assert_eq!(Workload::from_json(&w.to_json()).unwrap(), w);
        assert!(
            Workload::from_json("{\"mu\": 1, \"sparsity\": {\"zero\":1,\"one\":0,\"dense\":0}, \"seed\": 0}").is_err()
        );
        assert!(
            Workload::from_json("{\"mu\": 4, \"sparsity\": {\"zero\":0.5,\"one\":0.6,\"dense\":0}, \"seed\": 0}")
                .is_err()
        );
    }
}
