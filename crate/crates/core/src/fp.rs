//! Prime-field arithmetic with a runtime modulus.
//!
//! Elements are kept in Montgomery form over `n = ceil(W / 64)` 64-bit limbs,
//! so the same code serves a 5-bit test prime, the 255-bit BLS12-381 scalar
//! field and the 381-bit base field. Inversion uses a constant-time binary
//! extended Euclidean loop with exactly `2W - 1` iterations.

use std::fmt;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

/// Largest supported limb count (384 bits).
pub const MAX_LIMBS: usize = 6;

type Limbs = [u64; MAX_LIMBS];

/// BLS12-381 scalar-field modulus `r`.
pub const BLS12_381_SCALAR_MODULUS: &str = "0x73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001";
/// BLS12-381 base-field modulus `p`.
pub const BLS12_381_BASE_MODULUS: &str =
    "0x1a0111ea397fe69a4b1ba7b6434bacd764774b84f38512bf6730d2a0f6b0f6241eabfffeb153ffffb9feffffffffaaab";

static NEXT_TAG: AtomicU32 = AtomicU32::new(1);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("operands belong to different field configurations")]
    ConfigMismatch,
    #[error("zero has no multiplicative inverse")]
    NotInvertible,
    #[error("batch element at index {index} is zero")]
    ZeroInBatch { index: usize },
    #[error("invalid field configuration: {0}")]
    InvalidConfig(String),
    #[error("encoded value is not a canonical field element")]
    NonCanonical,
}

/// Immutable description of a prime field `F_q`.
#[derive(Debug)]
pub struct FieldConfig {
    modulus: Limbs,
    limbs: usize,
    bit_width: u32,
    /// `-q^{-1} mod 2^64`
    inv: u64,
    /// `R mod q`, `R = 2^(64 * limbs)`
    r: Limbs,
    r2: Limbs,
    r3: Limbs,
    tag: u32,
    modulus_big: BigUint,
}

impl FieldConfig {
    pub fn modulus(&self) -> &BigUint {
        &self.modulus_big
    }

    pub fn bit_width(&self) -> u32 {
        self.bit_width
    }

    pub fn limbs(&self) -> usize {
        self.limbs
    }

    /// Canonical encoding width in bytes.
    pub fn byte_len(&self) -> usize {
        self.bit_width.div_ceil(8) as usize
    }

    /// Iteration count of the constant-time inversion loop.
    pub fn beea_iterations(&self) -> u32 {
        2 * self.bit_width - 1
    }
}

/// Shared operation tally (modmuls, or PADDs for curve handles). Attach it to a [`Field`] handle with
/// [`Field::with_counter`]; every counted multiplication bumps it.
#[derive(Clone, Debug, Default)]
pub struct OpCounter(Arc<AtomicU64>);

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.0.store(0, Ordering::Relaxed);
    }

    pub fn add(&self, n: u64) {
        self.0.fetch_add(n, Ordering::Relaxed);
    }

    pub fn take(&self) -> u64 {
        self.0.swap(0, Ordering::Relaxed)
    }
}

/// Field element in Montgomery form. Only meaningful together with the
/// [`Field`] that produced it; the tag identifies that configuration.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fe {
    limbs: Limbs,
    tag: u32,
}

impl Fe {
    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    pub fn tag(&self) -> u32 {
        self.tag
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fe(mont:")?;
        for l in self.limbs.iter().rev() {
            write!(f, "{l:016x}")?;
        }
        write!(f, ")")
    }
}

/// Cheap, cloneable handle on a field configuration plus optional
/// instrumentation.
#[derive(Clone)]
pub struct Field {
    cfg: Arc<FieldConfig>,
    counter: Option<OpCounter>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field(q={:#x}, W={})", self.cfg.modulus_big, self.cfg.bit_width)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.cfg.tag == other.cfg.tag
    }
}

#[inline(always)]
fn mac(acc: u64, a: u64, b: u64, carry: u64) -> (u64, u64) {
    let t = acc as u128 + (a as u128) * (b as u128) + carry as u128;
    (t as u64, (t >> 64) as u64)
}

#[inline(always)]
fn adc(a: u64, b: u64, carry: u64) -> (u64, u64) {
    let t = a as u128 + b as u128 + carry as u128;
    (t as u64, (t >> 64) as u64)
}

#[inline(always)]
fn sbb(a: u64, b: u64, borrow: u64) -> (u64, u64) {
    let t = (a as u128).wrapping_sub(b as u128 + borrow as u128);
    (t as u64, ((t >> 64) as u64) & 1)
}

fn limbs_from_big(x: &BigUint) -> Limbs {
    let mut out = [0u64; MAX_LIMBS];
    for (i, d) in x.to_u64_digits().into_iter().enumerate().take(MAX_LIMBS) {
        out[i] = d;
    }
    out
}

fn big_from_limbs(x: &Limbs, n: usize) -> BigUint {
    let mut bytes = Vec::with_capacity(8 * n);
    for l in &x[..n] {
        bytes.extend_from_slice(&l.to_le_bytes());
    }
    BigUint::from_bytes_le(&bytes)
}

/// Miller-Rabin with a fixed set of prime bases.
pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    const SMALL: [u32; 24] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    ];
    for p in SMALL {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let n1 = n - 1u32;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'bases: for a in SMALL {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

impl Field {
    /// Builds a field from a modulus and a bit width `W` with
    /// `2^(W-1) <= q < 2^W`.
    pub fn new(modulus: &BigUint, bit_width: u32) -> Result<Self, FieldError> {
        if bit_width < 2 || bit_width as usize > 64 * MAX_LIMBS {
            return Err(FieldError::InvalidConfig(format!(
                "bit width {bit_width} outside 2..={}",
                64 * MAX_LIMBS
            )));
        }
        if modulus.bits() != bit_width as u64 {
            return Err(FieldError::InvalidConfig(format!(
                "modulus has {} bits, expected {bit_width}",
                modulus.bits()
            )));
        }
        if !modulus.bit(0) {
            return Err(FieldError::InvalidConfig("modulus must be odd".into()));
        }
        if !is_probable_prime(modulus) {
            return Err(FieldError::InvalidConfig("modulus is not prime".into()));
        }
        let limbs = bit_width.div_ceil(64) as usize;
        let q = limbs_from_big(modulus);

        // Newton iteration for q^{-1} mod 2^64.
        let mut qinv: u64 = 1;
        for _ in 0..6 {
            qinv = qinv.wrapping_mul(2u64.wrapping_sub(q[0].wrapping_mul(qinv)));
        }
        let inv = qinv.wrapping_neg();

        let r_big = (BigUint::one() << (64 * limbs)) % modulus;
        let r2_big = (&r_big * &r_big) % modulus;
        let r3_big = (&r2_big * &r_big) % modulus;
        let cfg = FieldConfig {
            modulus: q,
            limbs,
            bit_width,
            inv,
            r: limbs_from_big(&r_big),
            r2: limbs_from_big(&r2_big),
            r3: limbs_from_big(&r3_big),
            tag: NEXT_TAG.fetch_add(1, Ordering::Relaxed),
            modulus_big: modulus.clone(),
        };
        Ok(Field {
            cfg: Arc::new(cfg),
            counter: None,
        })
    }

    /// Parses a `0x`-prefixed (or bare) hex modulus.
    pub fn from_hex(modulus_hex: &str, bit_width: u32) -> Result<Self, FieldError> {
        let digits = modulus_hex.trim().trim_start_matches("0x").trim_start_matches("0X");
        let q = BigUint::parse_bytes(digits.as_bytes(), 16)
            .ok_or_else(|| FieldError::InvalidConfig(format!("bad hex modulus {modulus_hex:?}")))?;
        Self::new(&q, bit_width)
    }

    pub fn from_u64_modulus(q: u64) -> Result<Self, FieldError> {
        let big = BigUint::from(q);
        let bits = big.bits() as u32;
        Self::new(&big, bits)
    }

    pub fn bls12_381_scalar() -> Self {
        Self::from_hex(BLS12_381_SCALAR_MODULUS, 255).expect("valid preset")
    }

    pub fn bls12_381_base() -> Self {
        Self::from_hex(BLS12_381_BASE_MODULUS, 381).expect("valid preset")
    }

    pub fn config(&self) -> &FieldConfig {
        &self.cfg
    }

    pub fn modulus(&self) -> &BigUint {
        &self.cfg.modulus_big
    }

    pub fn bit_width(&self) -> u32 {
        self.cfg.bit_width
    }

    pub fn byte_len(&self) -> usize {
        self.cfg.byte_len()
    }

    /// A handle sharing this configuration whose multiplications are tallied
    /// in `counter`.
    pub fn with_counter(&self, counter: &OpCounter) -> Field {
        Field {
            cfg: Arc::clone(&self.cfg),
            counter: Some(counter.clone()),
        }
    }

    /// A handle with instrumentation stripped.
    pub fn uncounted(&self) -> Field {
        Field {
            cfg: Arc::clone(&self.cfg),
            counter: None,
        }
    }

    pub fn counter(&self) -> Option<&OpCounter> {
        self.counter.as_ref()
    }

    #[inline(always)]
    fn fe(&self, limbs: Limbs) -> Fe {
        Fe {
            limbs,
            tag: self.cfg.tag,
        }
    }

    #[inline(always)]
    fn tally(&self, n: u64) {
        if let Some(c) = &self.counter {
            c.0.fetch_add(n, Ordering::Relaxed);
        }
    }

    pub fn zero(&self) -> Fe {
        self.fe([0; MAX_LIMBS])
    }

    pub fn one(&self) -> Fe {
        self.fe(self.cfg.r)
    }

    pub fn owns(&self, a: &Fe) -> bool {
        a.tag == self.cfg.tag
    }

    fn check(&self, a: &Fe) -> Result<(), FieldError> {
        if self.owns(a) {
            Ok(())
        } else {
            Err(FieldError::ConfigMismatch)
        }
    }

    // ---- limb-level helpers -------------------------------------------

    #[inline(always)]
    fn geq_modulus(&self, x: &Limbs) -> bool {
        let n = self.cfg.limbs;
        for i in (0..n).rev() {
            if x[i] != self.cfg.modulus[i] {
                return x[i] > self.cfg.modulus[i];
            }
        }
        true
    }

    #[inline(always)]
    fn sub_modulus(&self, x: &mut Limbs) {
        let n = self.cfg.limbs;
        let mut borrow = 0;
        for i in 0..n {
            let (d, b) = sbb(x[i], self.cfg.modulus[i], borrow);
            x[i] = d;
            borrow = b;
        }
    }

    /// Montgomery product `a * b * R^{-1} mod q` (CIOS), not tallied.
    #[inline]
    fn mont_mul(&self, a: &Limbs, b: &Limbs) -> Limbs {
        let n = self.cfg.limbs;
        let q = &self.cfg.modulus;
        let mut t = [0u64; MAX_LIMBS + 2];
        for i in 0..n {
            let mut c = 0u64;
            for j in 0..n {
                let (lo, hi) = mac(t[j], a[j], b[i], c);
                t[j] = lo;
                c = hi;
            }
            let (lo, hi) = adc(t[n], c, 0);
            t[n] = lo;
            t[n + 1] = hi;

            let m = t[0].wrapping_mul(self.cfg.inv);
            let (_, mut c) = mac(t[0], m, q[0], 0);
            for j in 1..n {
                let (lo, hi) = mac(t[j], m, q[j], c);
                t[j - 1] = lo;
                c = hi;
            }
            let (lo, hi) = adc(t[n], c, 0);
            t[n - 1] = lo;
            t[n] = t[n + 1] + hi;
        }
        let mut out = [0u64; MAX_LIMBS];
        out[..n].copy_from_slice(&t[..n]);
        if t[n] != 0 || self.geq_modulus(&out) {
            self.sub_modulus(&mut out);
        }
        out
    }

    // ---- arithmetic ----------------------------------------------------

    #[inline]
    pub fn add(&self, a: &Fe, b: &Fe) -> Fe {
        debug_assert!(self.owns(a) && self.owns(b));
        let n = self.cfg.limbs;
        let mut out = [0u64; MAX_LIMBS];
        let mut carry = 0;
        for i in 0..n {
            let (s, c) = adc(a.limbs[i], b.limbs[i], carry);
            out[i] = s;
            carry = c;
        }
        if carry != 0 || self.geq_modulus(&out) {
            self.sub_modulus(&mut out);
        }
        self.fe(out)
    }

    #[inline]
    pub fn sub(&self, a: &Fe, b: &Fe) -> Fe {
        debug_assert!(self.owns(a) && self.owns(b));
        let n = self.cfg.limbs;
        let mut out = [0u64; MAX_LIMBS];
        let mut borrow = 0;
        for i in 0..n {
            let (d, bo) = sbb(a.limbs[i], b.limbs[i], borrow);
            out[i] = d;
            borrow = bo;
        }
        if borrow != 0 {
            let mut carry = 0;
            for i in 0..n {
                let (s, c) = adc(out[i], self.cfg.modulus[i], carry);
                out[i] = s;
                carry = c;
            }
        }
        self.fe(out)
    }

    #[inline]
    pub fn neg(&self, a: &Fe) -> Fe {
        self.sub(&self.zero(), a)
    }

    #[inline]
    pub fn double(&self, a: &Fe) -> Fe {
        self.add(a, a)
    }

    /// Counted modular multiplication (hot path; operands must share this
    /// configuration, checked in debug builds).
    #[inline]
    pub fn mul(&self, a: &Fe, b: &Fe) -> Fe {
        debug_assert!(self.owns(a) && self.owns(b), "mixed field configurations");
        self.tally(1);
        self.fe(self.mont_mul(&a.limbs, &b.limbs))
    }

    #[inline]
    pub fn square(&self, a: &Fe) -> Fe {
        self.mul(a, a)
    }

    /// Checked modular multiplication.
    pub fn mod_mul(&self, a: &Fe, b: &Fe) -> Result<Fe, FieldError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    pub fn pow(&self, base: &Fe, exp: &BigUint) -> Fe {
        let mut acc = self.one();
        for i in (0..exp.bits()).rev() {
            acc = self.square(&acc);
            if exp.bit(i) {
                acc = self.mul(&acc, base);
            }
        }
        acc
    }

    /// Small-integer multiple by repeated doubling and addition (no modmul).
    pub fn mul_small(&self, a: &Fe, k: u64) -> Fe {
        let mut acc = self.zero();
        for i in (0..64 - k.leading_zeros()).rev() {
            acc = self.double(&acc);
            if (k >> i) & 1 == 1 {
                acc = self.add(&acc, a);
            }
        }
        acc
    }

    // ---- conversions ---------------------------------------------------

    pub fn from_u64(&self, v: u64) -> Fe {
        self.from_biguint(&BigUint::from(v))
    }

    pub fn from_i64(&self, v: i64) -> Fe {
        let x = self.from_u64(v.unsigned_abs());
        if v < 0 {
            self.neg(&x)
        } else {
            x
        }
    }

    /// Reduces `v` modulo `q` and converts into Montgomery form.
    pub fn from_biguint(&self, v: &BigUint) -> Fe {
        let reduced = v % &self.cfg.modulus_big;
        let limbs = limbs_from_big(&reduced);
        self.fe(self.mont_mul(&limbs, &self.cfg.r2))
    }

    /// Canonical integer value in `[0, q)`.
    pub fn to_biguint(&self, a: &Fe) -> BigUint {
        big_from_limbs(&self.canonical_limbs(a), self.cfg.limbs)
    }

    /// Low 64 bits of the canonical value.
    pub fn to_u64_lossy(&self, a: &Fe) -> u64 {
        self.canonical_limbs(a)[0]
    }

    fn canonical_limbs(&self, a: &Fe) -> Limbs {
        let mut one = [0u64; MAX_LIMBS];
        one[0] = 1;
        self.mont_mul(&a.limbs, &one)
    }

    /// Canonical little-endian limbs (non-Montgomery).
    pub fn to_canonical_limbs(&self, a: &Fe) -> Vec<u64> {
        self.canonical_limbs(a)[..self.cfg.limbs].to_vec()
    }

    /// Bit `i` of the canonical value.
    pub fn bit(&self, a: &Fe, i: u32) -> bool {
        let l = self.canonical_limbs(a);
        let (w, b) = ((i / 64) as usize, i % 64);
        w < MAX_LIMBS && (l[w] >> b) & 1 == 1
    }

    /// `W`-bit window starting at bit `offset` of the canonical value.
    pub fn window(canonical: &[u64], offset: u32, width: u32) -> u64 {
        let mut out = 0u64;
        for k in 0..width {
            let i = offset + k;
            let w = (i / 64) as usize;
            if w < canonical.len() && (canonical[w] >> (i % 64)) & 1 == 1 {
                out |= 1 << k;
            }
        }
        out
    }

    /// Canonical little-endian encoding of exactly [`byte_len`](Self::byte_len) bytes.
    pub fn to_bytes_le(&self, a: &Fe) -> Vec<u8> {
        let l = self.canonical_limbs(a);
        let mut out = Vec::with_capacity(8 * self.cfg.limbs);
        for limb in &l[..self.cfg.limbs] {
            out.extend_from_slice(&limb.to_le_bytes());
        }
        out.truncate(self.byte_len());
        out
    }

    pub fn to_bytes_be(&self, a: &Fe) -> Vec<u8> {
        let mut v = self.to_bytes_le(a);
        v.reverse();
        v
    }

    /// Decodes a canonical little-endian encoding; values `>= q` are rejected.
    pub fn from_bytes_le(&self, bytes: &[u8]) -> Result<Fe, FieldError> {
        if bytes.len() != self.byte_len() {
            return Err(FieldError::NonCanonical);
        }
        let v = BigUint::from_bytes_le(bytes);
        if v >= self.cfg.modulus_big {
            return Err(FieldError::NonCanonical);
        }
        Ok(self.from_biguint(&v))
    }

    /// Reduces an arbitrary big-endian byte string modulo `q`.
    pub fn from_bytes_be_mod_order(&self, bytes: &[u8]) -> Fe {
        self.from_biguint(&BigUint::from_bytes_be(bytes))
    }

    /// Uniform element by rejection sampling over `W`-bit strings.
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        let n = self.cfg.limbs;
        let top_bits = self.cfg.bit_width - 64 * (n as u32 - 1);
        loop {
            let mut l = [0u64; MAX_LIMBS];
            for limb in l.iter_mut().take(n) {
                *limb = rng.gen();
            }
            if top_bits < 64 {
                l[n - 1] &= (1u64 << top_bits) - 1;
            }
            if !self.geq_modulus(&l) {
                return self.fe(self.mont_mul(&l, &self.cfg.r2));
            }
        }
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        loop {
            let x = self.random(rng);
            if !x.is_zero() {
                return x;
            }
        }
    }

    // ---- inversion -----------------------------------------------------

    /// Constant-time binary extended Euclidean inversion. Returns the inverse
    /// and the number of loop iterations executed (always `2W - 1`).
    ///
    /// Costs one tallied multiplication: the loop runs on the Montgomery
    /// representation `aR` and yields `a^{-1} R^{-1}`; multiplying by `R^3`
    /// restores `a^{-1} R`.
    pub fn inv_beea_traced(&self, a: &Fe) -> Result<(Fe, u32), FieldError> {
        self.check(a)?;
        if a.is_zero() {
            return Err(FieldError::NotInvertible);
        }
        let n = self.cfg.limbs;
        let q = self.cfg.modulus;
        let mut x = a.limbs; // tracks value a_i with x ≡ u * input
        let mut y = q; // tracks b_i with y ≡ v * input
        let mut u: Limbs = [0; MAX_LIMBS];
        u[0] = 1;
        let mut v: Limbs = [0; MAX_LIMBS];
        let iterations = self.cfg.beea_iterations();
        let mut executed = 0u32;

        for _ in 0..iterations {
            let odd = (x[0] & 1).wrapping_neg();
            // borrow of x - y tells whether x < y
            let mut borrow = 0;
            for i in 0..n {
                let (_, b) = sbb(x[i], y[i], borrow);
                borrow = b;
            }
            let swap = odd & borrow.wrapping_neg();
            for i in 0..n {
                let t = (x[i] ^ y[i]) & swap;
                x[i] ^= t;
                y[i] ^= t;
                let s = (u[i] ^ v[i]) & swap;
                u[i] ^= s;
                v[i] ^= s;
            }
            // x -= y when odd
            let mut borrow = 0;
            for i in 0..n {
                let (d, b) = sbb(x[i], y[i] & odd, borrow);
                x[i] = d;
                borrow = b;
            }
            // u = u - v (mod q) when odd
            let mut borrow = 0;
            for i in 0..n {
                let (d, b) = sbb(u[i], v[i] & odd, borrow);
                u[i] = d;
                borrow = b;
            }
            let fix = borrow.wrapping_neg();
            let mut carry = 0;
            for i in 0..n {
                let (s, c) = adc(u[i], q[i] & fix, carry);
                u[i] = s;
                carry = c;
            }
            // x /= 2
            for i in 0..n {
                let hi = if i + 1 < n { x[i + 1] << 63 } else { 0 };
                x[i] = (x[i] >> 1) | hi;
            }
            // u /= 2 (mod q): add q when u is odd, then shift in the carry
            let uodd = (u[0] & 1).wrapping_neg();
            let mut carry = 0;
            for i in 0..n {
                let (s, c) = adc(u[i], q[i] & uodd, carry);
                u[i] = s;
                carry = c;
            }
            for i in 0..n {
                let hi = if i + 1 < n { u[i + 1] << 63 } else { carry << 63 };
                u[i] = (u[i] >> 1) | hi;
            }
            executed += 1;
        }

        let mut one = [0u64; MAX_LIMBS];
        one[0] = 1;
        if y[..n] != one[..n] {
            return Err(FieldError::NotInvertible);
        }
        self.tally(1);
        let out = self.mont_mul(&v, &self.cfg.r3);
        Ok((self.fe(out), executed))
    }

    /// Modular inverse via the constant-time loop.
    pub fn inv(&self, a: &Fe) -> Result<Fe, FieldError> {
        self.inv_beea_traced(a).map(|(y, _)| y)
    }

    /// Montgomery batch inversion: one [`inv`](Self::inv) plus `3(n-1)`
    /// multiplications. Output order matches input order.
    pub fn batch_inverse(&self, xs: &[Fe]) -> Result<Vec<Fe>, FieldError> {
        if xs.is_empty() {
            return Ok(Vec::new());
        }
        for (index, x) in xs.iter().enumerate() {
            self.check(x)?;
            if x.is_zero() {
                return Err(FieldError::ZeroInBatch { index });
            }
        }
        // prefix[i] = x_0 * ... * x_i
        let mut prefix = Vec::with_capacity(xs.len());
        prefix.push(xs[0]);
        for x in &xs[1..] {
            let last = prefix[prefix.len() - 1];
            prefix.push(self.mul(&last, x));
        }
        let mut acc = self.inv(&prefix[xs.len() - 1])?;
        let mut out = vec![self.zero(); xs.len()];
        for i in (1..xs.len()).rev() {
            out[i] = self.mul(&acc, &prefix[i - 1]);
            acc = self.mul(&acc, &xs[i]);
        }
        out[0] = acc;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f17() -> Field {
        Field::from_u64_modulus(17).unwrap()
    }

    #[test]
    fn small_field_examples() {
        let f = f17();
        let a = f.from_u64(2);
        let b = f.from_u64(9);
        assert_eq!(f.to_biguint(&f.mul(&a, &b)), BigUint::from(1u32));
        let m1 = f.from_u64(16);
        assert_eq!(f.mul(&m1, &m1), f.one());
        assert_eq!(f.mul(&a, &f.one()), a);
        assert_eq!(f.inv(&a).unwrap(), f.from_u64(9));
        assert_eq!(f.inv(&f.one()).unwrap(), f.one());
    }

    #[test]
    fn batch_examples() {
        let f = f17();
        let xs: Vec<Fe> = [2, 3, 4].iter().map(|&v| f.from_u64(v)).collect();
        let inv: Vec<u64> = f
            .batch_inverse(&xs)
            .unwrap()
            .iter()
            .map(|x| f.to_u64_lossy(x))
            .collect();
        assert_eq!(inv, vec![9, 6, 13]);
        let ones = vec![f.one(); 3];
        assert_eq!(f.batch_inverse(&ones).unwrap(), ones);
        assert!(f.batch_inverse(&[]).unwrap().is_empty());
    }

    #[test]
    fn zero_errors() {
        let f = f17();
        assert_eq!(f.inv(&f.zero()), Err(FieldError::NotInvertible));
        let xs = vec![f.one(), f.from_u64(5), f.zero(), f.zero()];
        assert_eq!(f.batch_inverse(&xs), Err(FieldError::ZeroInBatch { index: 2 }));
    }

    #[test]
    fn mixed_configs_are_rejected() {
        let f = f17();
        let g = Field::from_u64_modulus(19).unwrap();
        assert_eq!(f.mod_mul(&f.one(), &g.one()), Err(FieldError::ConfigMismatch));
        // a second field with the same modulus is still a distinct configuration
        let f2 = f17();
        assert_eq!(f.mod_mul(&f.one(), &f2.one()), Err(FieldError::ConfigMismatch));
        assert!(f.mod_mul(&f.one(), &f.with_counter(&OpCounter::new()).one()).is_ok());
    }

    #[test]
    fn rejects_bad_moduli() {
        assert!(Field::from_u64_modulus(15).is_err());
        assert!(Field::from_u64_modulus(16).is_err());
        assert!(Field::new(&BigUint::from(17u32), 6).is_err());
    }

    #[test]
    fn beea_iterations_for_w255() {
        let f = Field::bls12_381_scalar();
        assert_eq!(f.config().beea_iterations(), 509);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let a = f.random_nonzero(&mut rng);
            let (y, it) = f.inv_beea_traced(&a).unwrap();
            assert_eq!(it, 509);
            assert_eq!(f.mul(&a, &y), f.one());
        }
    }

    #[test]
    fn montgomery_round_trip_exhaustive() {
        for q in [17u64, 8191] {
            let f = Field::from_u64_modulus(q).unwrap();
            for x in 0..q {
                assert_eq!(f.to_u64_lossy(&f.from_u64(x)), x);
            }
        }
    }

    #[test]
    fn inverse_exhaustive_small_primes() {
        for q in [3u64, 5, 17, 19, 251, 8191, 65521] {
            let f = Field::from_u64_modulus(q).unwrap();
            for x in 1..q.min(3000) {
                let a = f.from_u64(x);
                let (y, it) = f.inv_beea_traced(&a).unwrap();
                assert_eq!(it, 2 * f.bit_width() - 1);
                assert_eq!(f.mul(&a, &y), f.one(), "q={q} x={x}");
            }
        }
    }

    #[test]
    fn batch_counts_three_per_element() {
        let f = Field::bls12_381_scalar();
        let c = OpCounter::new();
        let fc = f.with_counter(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1usize, 2, 7, 64] {
            let xs: Vec<Fe> = (0..n).map(|_| f.random_nonzero(&mut rng)).collect();
            c.reset();
            fc.batch_inverse(&xs).unwrap();
            assert_eq!(c.get(), 3 * (n as u64 - 1) + 1);
        }
    }

    #[test]
    fn large_field_matches_bigint() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for f in [Field::bls12_381_scalar(), Field::bls12_381_base()] {
            let q = f.modulus().clone();
            for _ in 0..200 {
                let a = f.random(&mut rng);
                let b = f.random(&mut rng);
                let (ab, bb) = (f.to_biguint(&a), f.to_biguint(&b));
                assert_eq!(f.to_biguint(&f.mul(&a, &b)), (&ab * &bb) % &q);
                assert_eq!(f.to_biguint(&f.add(&a, &b)), (&ab + &bb) % &q);
                assert_eq!(f.to_biguint(&f.sub(&a, &b)), (&ab + &q - &bb) % &q);
                let bytes = f.to_bytes_le(&a);
                assert_eq!(bytes.len(), f.byte_len());
                assert_eq!(f.from_bytes_le(&bytes).unwrap(), a);
            }
        }
    }

    #[test]
    fn non_canonical_bytes_rejected() {
        let f = f17();
        assert_eq!(f.from_bytes_le(&[17]), Err(FieldError::NonCanonical));
        assert_eq!(f.from_bytes_le(&[3, 0]), Err(FieldError::NonCanonical));
        assert_eq!(f.from_bytes_le(&[16]).unwrap(), f.from_u64(16));
    }
}
