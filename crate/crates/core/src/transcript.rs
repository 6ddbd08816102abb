//! SHA3-256 Fiat-Shamir transcript.
//!
//! Byte format of one absorb: `u32be(len(label)) || label || u32be(len(data)) || data`.
//! A challenge hashes the running state followed by the raw label, reduces
//! the big-endian digest modulo `q`, and then absorbs `(label, digest)` so
//! consecutive challenges differ.

use sha3::{Digest, Sha3_256};

use crate::fp::{Fe, Field};

/// Anything that can feed prover messages in and hand challenges out.
pub trait ChallengeSource {
    fn absorb(&mut self, label: &[u8], data: &[u8]);
    fn challenge(&mut self, label: &[u8]) -> Fe;

    fn absorb_fes(&mut self, label: &[u8], f: &Field, xs: &[Fe]) {
        let mut data = Vec::with_capacity(xs.len() * f.byte_len());
        for x in xs {
            data.extend_from_slice(&f.to_bytes_le(x));
        }
        self.absorb(label, &data);
    }
}

#[derive(Clone)]
pub struct Transcript {
    field: Field,
    state: Sha3_256,
    challenges: u64,
}

impl Transcript {
    pub fn new(field: &Field) -> Self {
        Self {
            field: field.uncounted(),
            state: Sha3_256::new(),
            challenges: 0,
        }
    }

    /// A transcript that starts by absorbing a domain-separation tag.
    pub fn with_domain(field: &Field, domain: &[u8]) -> Self {
        let mut t = Self::new(field);
        t.absorb(b"domain", domain);
        t
    }

    pub fn challenges_drawn(&self) -> u64 {
        self.challenges
    }

    /// Hash of everything absorbed so far (does not advance the state).
    pub fn digest(&self) -> [u8; 32] {
        self.state.clone().finalize().into()
    }

    pub fn challenge_vec(&mut self, label: &[u8], n: usize) -> Vec<Fe> {
        (0..n).map(|_| self.challenge(label)).collect()
    }
}

impl ChallengeSource for Transcript {
    fn absorb(&mut self, label: &[u8], data: &[u8]) {
        self.state.update((label.len() as u32).to_be_bytes());
        self.state.update(label);
        self.state.update((data.len() as u32).to_be_bytes());
        self.state.update(data);
    }

    fn challenge(&mut self, label: &[u8]) -> Fe {
        let mut h = self.state.clone();
        h.update(label);
        let digest = h.finalize();
        let c = self.field.from_bytes_be_mod_order(&digest);
        self.challenges += 1;
        self.absorb(label, &digest);
        c
    }
}

/// Replays a fixed list of challenges and ignores absorbs. Used in tests
/// where the challenge values are chosen by hand.
#[derive(Clone, Debug)]
pub struct ScriptedChallenges {
    values: Vec<Fe>,
    next: usize,
}

impl ScriptedChallenges {
    pub fn new(values: Vec<Fe>) -> Self {
        Self { values, next: 0 }
    }
}

impl ChallengeSource for ScriptedChallenges {
    fn absorb(&mut self, _label: &[u8], _data: &[u8]) {}

    fn challenge(&mut self, _label: &[u8]) -> Fe {
        let v = *self.values.get(self.next).expect("scripted challenge list exhausted");
        self.next += 1;
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    #[test]
    fn empty_transcript_challenge_matches_sha3() {
        let f = Field::bls12_381_scalar();
        let mut t = Transcript::new(&f);
        let c = t.challenge(b"t");
        // SHA3-256(b"t") mod r, computed with Python's hashlib.
        let expect = f.from_biguint(
            &BigUint::parse_bytes(b"14a98295a93b090226a146115134a47140d7d4fc2b47db398564a81ed68fc01d", 16).unwrap(),
        );
        assert_eq!(c, expect);
    }

    #[test]
    fn absorb_byte_format() {
        let f = Field::bls12_381_scalar();
        let mut t = Transcript::new(&f);
        t.absorb(b"x", &[1, 2, 3]);
        // SHA3-256(00000001 'x' 00000003 010203 'c') mod r, via hashlib.
        let expect = f.from_biguint(
            &BigUint::parse_bytes(b"501c8a37d978337cbe439c603d659595a8e54e13195e2f98429c7bef9b46c95f", 16).unwrap(),
        );
        assert_eq!(t.challenge(b"c"), expect);
    }

    #[test]
    fn determinism_and_sensitivity() {
        let f = Field::bls12_381_scalar();
        let mut a = Transcript::new(&f);
        let mut b = Transcript::new(&f);
        a.absorb(b"x", &[1, 2, 3]);
        b.absorb(b"x", &[1, 2, 3]);
        assert_eq!(a.challenge(b"c"), b.challenge(b"c"));
        assert_eq!(a.challenge(b"c"), b.challenge(b"c"));
        let mut c = Transcript::new(&f);
        c.absorb(b"x", &[1, 2, 4]);
        let mut d = Transcript::new(&f);
        d.absorb(b"x", &[1, 2, 3]);
        assert_ne!(c.challenge(b"c"), d.challenge(b"c"));
    }

    #[test]
    fn successive_challenges_differ() {
        let f = Field::bls12_381_scalar();
        let mut t = Transcript::new(&f);
        let v = t.challenge_vec(b"r", 4);
        for i in 0..4 {
            for j in i + 1..4 {
                assert_ne!(v[i], v[j]);
            }
        }
        assert_eq!(t.challenges_drawn(), 4);
    }

    #[test]
    fn length_prefix_separates_label_and_data() {
        let f = Field::bls12_381_scalar();
        let mut a = Transcript::new(&f);
        a.absorb(b"ab", b"c");
        let mut b = Transcript::new(&f);
        b.absorb(b"a", b"bc");
        assert_ne!(a.digest(), b.digest());
    }
}
