//! Short-Weierstrass curves `y^2 = x^3 + a x + b` in homogeneous projective
//! coordinates.
//!
//! Addition uses the complete formulas of Renes, Costello and Batina (2016,
//! algorithm 1), so doubling and the identity `(0:1:0)` take the same code
//! path. Those formulas are exceptional only on curves with even order; the
//! toy curve has a 2-torsion point, and for it a zero output is recomputed
//! with the affine chord-tangent rule.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use crate::fp::{Fe, Field, FieldError, OpCounter};

/// Base-field multiplications in one [`Curve::padd`].
pub const PADD_MODMULS: u64 = 17;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("points belong to a different curve")]
    CurveMismatch,
    #[error("generator is not on the curve")]
    GeneratorOffCurve,
    #[error("singular curve (zero discriminant)")]
    Singular,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Projective point. Compare with [`Curve::eq_points`] or via [`Curve::to_affine`].
#[derive(Clone, Copy, Debug)]
pub struct Point {
    pub x: Fe,
    pub y: Fe,
    pub z: Fe,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Affine {
    Identity,
    Point { x: BigUint, y: BigUint },
}

pub struct CurveConfig {
    name: String,
    base: Field,
    scalar: Field,
    a: Fe,
    b: Fe,
    b3: Fe,
    generator: Point,
}

#[derive(Clone)]
pub struct Curve {
    cfg: Arc<CurveConfig>,
    base: Field,
    padds: Option<OpCounter>,
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Curve({})", self.cfg.name)
    }
}

impl Curve {
    pub fn new(
        name: String,
        base: Field,
        scalar: Field,
        a: &BigUint,
        b: &BigUint,
        gx: &BigUint,
        gy: &BigUint,
    ) -> Result<Self, CurveError> {
        let fa = base.from_biguint(a);
        let fb = base.from_biguint(b);
        // 4a^3 + 27b^2 != 0
        let disc = base.add(
            &base.mul_small(&base.mul(&base.square(&fa), &fa), 4),
            &base.mul_small(&base.square(&fb), 27),
        );
        if disc.is_zero() {
            return Err(CurveError::Singular);
        }
        let generator = Point {
            x: base.from_biguint(gx),
            y: base.from_biguint(gy),
            z: base.one(),
        };
        let cfg = CurveConfig {
            name,
            b3: base.mul_small(&fb, 3),
            a: fa,
            b: fb,
            generator,
            base: base.uncounted(),
            scalar,
        };
        let curve = Curve {
            base: cfg.base.clone(),
            cfg: Arc::new(cfg),
            padds: None,
        };
        if !curve.is_on_curve(&curve.generator()) {
            return Err(CurveError::GeneratorOffCurve);
        }
        Ok(curve)
    }

    pub fn bls12_381_g1() -> Self {
        crate::config::curve_from_toml(crate::config::BLS12_381_TOML).expect("valid preset")
    }

    pub fn toy17() -> Self {
        crate::config::curve_from_toml(crate::config::TOY17_TOML).expect("valid preset")
    }

    pub fn name(&self) -> &str {
        &self.cfg.name
    }

    pub fn base(&self) -> &Field {
        &self.base
    }

    pub fn scalar_field(&self) -> &Field {
        &self.cfg.scalar
    }

    pub fn a(&self) -> Fe {
        self.cfg.a
    }

    pub fn b(&self) -> Fe {
        self.cfg.b
    }

    /// A handle whose base-field multiplications go to `modmuls` and whose
    /// point additions go to `padds`.
    pub fn instrumented(&self, modmuls: &OpCounter, padds: &OpCounter) -> Curve {
        Curve {
            cfg: Arc::clone(&self.cfg),
            base: self.cfg.base.with_counter(modmuls),
            padds: Some(padds.clone()),
        }
    }

    pub fn same_curve(&self, other: &Curve) -> bool {
        Arc::ptr_eq(&self.cfg, &other.cfg)
    }

    pub fn identity(&self) -> Point {
        Point {
            x: self.base.zero(),
            y: self.base.one(),
            z: self.base.zero(),
        }
    }

    pub fn generator(&self) -> Point {
        self.cfg.generator
    }

    pub fn is_identity(&self, p: &Point) -> bool {
        p.z.is_zero()
    }

    fn owns(&self, p: &Point) -> bool {
        self.base.owns(&p.x) && self.base.owns(&p.y) && self.base.owns(&p.z)
    }

    pub fn from_affine(&self, x: &BigUint, y: &BigUint) -> Point {
        Point {
            x: self.base.from_biguint(x),
            y: self.base.from_biguint(y),
            z: self.base.one(),
        }
    }

    /// `Y^2 Z = X^3 + a X Z^2 + b Z^3`, with `(0:Y:0)`, `Y != 0` as the identity.
    pub fn is_on_curve(&self, p: &Point) -> bool {
        let f = self.base.uncounted();
        if !self.owns(p) {
            return false;
        }
        if p.z.is_zero() {
            return p.x.is_zero() && !p.y.is_zero();
        }
        let z2 = f.square(&p.z);
        let lhs = f.mul(&f.square(&p.y), &p.z);
        let x3 = f.mul(&f.square(&p.x), &p.x);
        let axz2 = f.mul(&f.mul(&self.cfg.a, &p.x), &z2);
        let bz3 = f.mul(&f.mul(&self.cfg.b, &z2), &p.z);
        lhs == f.add(&f.add(&x3, &axz2), &bz3)
    }

    pub fn neg(&self, p: &Point) -> Point {
        Point {
            x: p.x,
            y: self.base.neg(&p.y),
            z: p.z,
        }
    }

    /// Complete projective addition: 17 base-field multiplications
    /// (12 general, 3 by `a`, 2 by `3b`).
    pub fn padd(&self, p: &Point, q: &Point) -> Point {
        debug_assert!(self.owns(p) && self.owns(q), "point from another curve");
        if let Some(c) = &self.padds {
            c.add(1);
        }
        let f = &self.base;
        let (x1, y1, z1) = (&p.x, &p.y, &p.z);
        let (x2, y2, z2) = (&q.x, &q.y, &q.z);
        let a = &self.cfg.a;
        let b3 = &self.cfg.b3;

        let mut t0 = f.mul(x1, x2);
        let mut t1 = f.mul(y1, y2);
        let mut t2 = f.mul(z1, z2);
        let mut t3 = f.add(x1, y1);
        let mut t4 = f.add(x2, y2);
        t3 = f.mul(&t3, &t4);
        t4 = f.add(&t0, &t1);
        t3 = f.sub(&t3, &t4);
        t4 = f.add(x1, z1);
        let mut t5 = f.add(x2, z2);
        t4 = f.mul(&t4, &t5);
        t5 = f.add(&t0, &t2);
        t4 = f.sub(&t4, &t5);
        t5 = f.add(y1, z1);
        let mut x3 = f.add(y2, z2);
        t5 = f.mul(&t5, &x3);
        x3 = f.add(&t1, &t2);
        t5 = f.sub(&t5, &x3);
        let mut z3 = f.mul(a, &t4);
        x3 = f.mul(b3, &t2);
        z3 = f.add(&x3, &z3);
        x3 = f.sub(&t1, &z3);
        z3 = f.add(&t1, &z3);
        let mut y3 = f.mul(&x3, &z3);
        t1 = f.add(&t0, &t0);
        t1 = f.add(&t1, &t0);
        t2 = f.mul(a, &t2);
        t4 = f.mul(b3, &t4);
        t1 = f.add(&t1, &t2);
        t2 = f.sub(&t0, &t2);
        t2 = f.mul(a, &t2);
        t4 = f.add(&t4, &t2);
        t0 = f.mul(&t1, &t4);
        y3 = f.add(&y3, &t0);
        t0 = f.mul(&t5, &t4);
        x3 = f.mul(&t3, &x3);
        x3 = f.sub(&x3, &t0);
        t0 = f.mul(&t3, &t1);
        z3 = f.mul(&t5, &z3);
        z3 = f.add(&z3, &t0);

        let out = Point { x: x3, y: y3, z: z3 };
        if out.x.is_zero() && out.y.is_zero() && out.z.is_zero() {
            // Exceptional pair on an even-order curve.
            return self.affine_add_fallback(p, q);
        }
        out
    }

    /// Checked addition for callers that mix curve handles.
    pub fn try_padd(&self, p: &Point, q: &Point) -> Result<Point, CurveError> {
        if !self.owns(p) || !self.owns(q) {
            return Err(CurveError::CurveMismatch);
        }
        Ok(self.padd(p, q))
    }

    pub fn pdbl(&self, p: &Point) -> Point {
        self.padd(p, p)
    }

    fn affine_add_fallback(&self, p: &Point, q: &Point) -> Point {
        let sum = self.affine_add(&self.to_affine(p), &self.to_affine(q));
        self.point_from(&sum)
    }

    pub fn point_from(&self, a: &Affine) -> Point {
        match a {
            Affine::Identity => self.identity(),
            Affine::Point { x, y } => self.from_affine(x, y),
        }
    }

    /// Chord-tangent addition on affine points (oracle; uses inversions).
    pub fn affine_add(&self, p: &Affine, q: &Affine) -> Affine {
        let f = self.base.uncounted();
        let (x1, y1, x2, y2) = match (p, q) {
            (Affine::Identity, _) => return q.clone(),
            (_, Affine::Identity) => return p.clone(),
            (Affine::Point { x: x1, y: y1 }, Affine::Point { x: x2, y: y2 }) => (
                f.from_biguint(x1),
                f.from_biguint(y1),
                f.from_biguint(x2),
                f.from_biguint(y2),
            ),
        };
        let lambda = if x1 == x2 {
            if f.add(&y1, &y2).is_zero() {
                return Affine::Identity;
            }
            // (3x^2 + a) / 2y
            let num = f.add(&f.mul_small(&f.square(&x1), 3), &self.cfg.a);
            f.mul(&num, &f.inv(&f.double(&y1)).expect("y nonzero"))
        } else {
            let num = f.sub(&y2, &y1);
            f.mul(&num, &f.inv(&f.sub(&x2, &x1)).expect("distinct x"))
        };
        let x3 = f.sub(&f.sub(&f.square(&lambda), &x1), &x2);
        let y3 = f.sub(&f.mul(&lambda, &f.sub(&x1, &x3)), &y1);
        Affine::Point {
            x: f.to_biguint(&x3),
            y: f.to_biguint(&y3),
        }
    }

    pub fn to_affine(&self, p: &Point) -> Affine {
        let f = self.base.uncounted();
        if p.z.is_zero() {
            return Affine::Identity;
        }
        let zi = f.inv(&p.z).expect("nonzero z");
        Affine::Point {
            x: f.to_biguint(&f.mul(&p.x, &zi)),
            y: f.to_biguint(&f.mul(&p.y, &zi)),
        }
    }

    /// Rescales every point to `Z = 1` (identity stays `(0:1:0)`) with one
    /// batched inversion.
    pub fn batch_normalize(&self, pts: &[Point]) -> Vec<Point> {
        let f = self.base.uncounted();
        let finite: Vec<Fe> = pts.iter().filter(|p| !p.z.is_zero()).map(|p| p.z).collect();
        let inv = f.batch_inverse(&finite).expect("nonzero z values");
        let mut it = inv.into_iter();
        pts.iter()
            .map(|p| {
                if p.z.is_zero() {
                    self.identity()
                } else {
                    let zi = it.next().expect("one inverse per finite point");
                    Point {
                        x: f.mul(&p.x, &zi),
                        y: f.mul(&p.y, &zi),
                        z: f.one(),
                    }
                }
            })
            .collect()
    }

    /// Projective equality: `X1 Z2 = X2 Z1` and `Y1 Z2 = Y2 Z1`.
    pub fn eq_points(&self, p: &Point, q: &Point) -> bool {
        let f = self.base.uncounted();
        f.mul(&p.x, &q.z) == f.mul(&q.x, &p.z) && f.mul(&p.y, &q.z) == f.mul(&q.y, &p.z)
    }

    /// Double-and-add on the canonical integer value of `k`.
    pub fn scalar_mul(&self, k: &Fe, p: &Point) -> Point {
        let s = self.cfg.scalar.to_biguint(k);
        self.scalar_mul_int(&s, p)
    }

    pub fn scalar_mul_int(&self, k: &BigUint, p: &Point) -> Point {
        let mut acc = self.identity();
        if k.is_zero() {
            return acc;
        }
        for i in (0..k.bits()).rev() {
            acc = self.pdbl(&acc);
            if k.bit(i) {
                acc = self.padd(&acc, p);
            }
        }
        acc
    }

    /// Fixed-width encoding of the affine form: flag byte (0 identity, 1
    /// finite) then `x`, `y` little-endian.
    pub fn encode_point(&self, p: &Point) -> Vec<u8> {
        let n = self.base.byte_len();
        let mut out = vec![0u8; 1 + 2 * n];
        if let Affine::Point { x, y } = self.to_affine(p) {
            out[0] = 1;
            let xb = x.to_bytes_le();
            let yb = y.to_bytes_le();
            out[1..1 + xb.len()].copy_from_slice(&xb);
            out[1 + n..1 + n + yb.len()].copy_from_slice(&yb);
        }
        out
    }

    pub fn encoded_len(&self) -> usize {
        1 + 2 * self.base.byte_len()
    }

    pub fn decode_point(&self, bytes: &[u8]) -> Result<Point, CurveError> {
        let n = self.base.byte_len();
        if bytes.len() != 1 + 2 * n {
            return Err(CurveError::Field(FieldError::NonCanonical));
        }
        match bytes[0] {
            0 if bytes[1..].iter().all(|&b| b == 0) => Ok(self.identity()),
            1 => {
                let x = self.base.from_bytes_le(&bytes[1..1 + n])?;
                let y = self.base.from_bytes_le(&bytes[1 + n..])?;
                let p = Point {
                    x,
                    y,
                    z: self.base.one(),
                };
                if self.is_on_curve(&p) {
                    Ok(p)
                } else {
                    Err(CurveError::GeneratorOffCurve)
                }
            }
            _ => Err(CurveError::Field(FieldError::NonCanonical)),
        }
    }

    /// All affine points of a small curve, identity first.
    pub fn enumerate_points(&self) -> Vec<Affine> {
        let f = self.base.uncounted();
        let q: u64 = f.modulus().try_into().expect("enumeration only for word-sized fields");
        assert!(q < 1 << 16, "enumeration only for tiny fields");
        let mut out = vec![Affine::Identity];
        for x in 0..q {
            let fx = f.from_u64(x);
            let rhs = f.add(
                &f.add(&f.mul(&f.square(&fx), &fx), &f.mul(&self.cfg.a, &fx)),
                &self.cfg.b,
            );
            for y in 0..q {
                let fy = f.from_u64(y);
                if f.square(&fy) == rhs {
                    out.push(Affine::Point {
                        x: BigUint::from(x),
                        y: BigUint::from(y),
                    });
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fp::OpCounter;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn toy_group_order_is_18() {
        let c = Curve::toy17();
        assert_eq!(c.enumerate_points().len(), 18);
        let g = c.generator();
        assert!(c.is_identity(&c.scalar_mul_int(&BigUint::from(18u32), &g)));
        assert!(c.is_identity(&c.scalar_mul_int(&BigUint::zero(), &g)));
        assert!(c.eq_points(&c.scalar_mul_int(&BigUint::from(1u32), &g), &g));
    }

    #[test]
    fn toy_addition_table_matches_affine() {
        let c = Curve::toy17();
        let pts = c.enumerate_points();
        for a in &pts {
            for b in &pts {
                let s = c.padd(&c.point_from(a), &c.point_from(b));
                assert!(c.is_on_curve(&s));
                assert_eq!(c.to_affine(&s), c.affine_add(a, b), "{a:?} + {b:?}");
            }
        }
    }

    #[test]
    fn doubling_generator_matches_tangent() {
        let c = Curve::toy17();
        let g = c.generator();
        // tangent at (1,5): lambda = 3/10 = 3*12 = 36 = 2; x = 4-2 = 2; y = 2(1-2)-5 = -7 = 10
        let want = Affine::Point {
            x: BigUint::from(2u32),
            y: BigUint::from(10u32),
        };
        assert_eq!(c.to_affine(&c.pdbl(&g)), want);
    }

    #[test]
    fn identity_and_inverse() {
        for c in [Curve::toy17(), Curve::bls12_381_g1()] {
            let g = c.generator();
            let o = c.identity();
            assert!(c.is_on_curve(&o));
            assert!(c.eq_points(&c.padd(&g, &o), &g));
            assert!(c.eq_points(&c.padd(&o, &g), &g));
            assert!(c.is_identity(&c.padd(&g, &c.neg(&g))));
            let bad = Point {
                x: g.x,
                y: c.base().add(&g.y, &c.base().one()),
                z: g.z,
            };
            assert!(!c.is_on_curve(&bad));
        }
    }

    #[test]
    fn padd_costs_17_modmuls() {
        let c = Curve::bls12_381_g1();
        let m = OpCounter::new();
        let p = OpCounter::new();
        let ci = c.instrumented(&m, &p);
        let g = c.generator();
        let h = ci.padd(&g, &g);
        ci.padd(&g, &h);
        assert_eq!(m.get(), 2 * PADD_MODMULS);
        assert_eq!(p.get(), 2);
    }

    #[test]
    fn bls_scalar_linearity() {
        let c = Curve::bls12_381_g1();
        let s = c.scalar_field().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = c.generator();
        for _ in 0..3 {
            let k1 = s.random(&mut rng);
            let k2 = s.random(&mut rng);
            let lhs = c.scalar_mul(&s.add(&k1, &k2), &g);
            let rhs = c.padd(&c.scalar_mul(&k1, &g), &c.scalar_mul(&k2, &g));
            assert!(c.eq_points(&lhs, &rhs));
            assert!(c.is_on_curve(&lhs));
        }
        // the generator has order r
        let r = s.modulus().clone();
        assert!(c.is_identity(&c.scalar_mul_int(&r, &g)));
        let _: u8 = rng.gen();
    }

    #[test]
    fn mixed_curves_rejected() {
        let a = Curve::toy17();
        let b = Curve::toy17();
        assert_eq!(
            a.try_padd(&a.generator(), &b.generator()).unwrap_err(),
            CurveError::CurveMismatch
        );
    }

    #[test]
    fn point_codec_round_trip() {
        let c = Curve::bls12_381_g1();
        let g = c.pdbl(&c.generator());
        let bytes = c.encode_point(&g);
        assert_eq!(bytes.len(), c.encoded_len());
        assert!(c.eq_points(&c.decode_point(&bytes).unwrap(), &g));
        let o = c.encode_point(&c.identity());
        assert!(c.is_identity(&c.decode_point(&o).unwrap()));
        let mut bad = bytes.clone();
        bad[5] ^= 1;
        assert!(c.decode_point(&bad).is_err());
    }

    #[test]
    fn batch_normalize_sets_z_one() {
        let c = Curve::toy17();
        let g = c.generator();
        let pts: Vec<Point> = (0..18u32).map(|k| c.scalar_mul_int(&BigUint::from(k), &g)).collect();
        let norm = c.batch_normalize(&pts);
        for (p, n) in pts.iter().zip(&norm) {
            assert!(c.eq_points(p, n));
            assert!(c.is_identity(n) || n.z == c.base().one());
        }
    }
}
