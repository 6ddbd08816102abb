//! Structured reference string: `P_i = [eq_i(tau)] G` for a seeded `tau`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ec::{Curve, Point};
use crate::mle::build_eq;

use super::ProverError;

#[derive(Clone, Debug)]
pub struct Srs {
    num_vars: usize,
    points: Vec<Point>,
}

impl Srs {
    /// Deterministic setup for up to `2^num_vars` points. Not a trusted
    /// setup: `tau` is derivable from `seed`.
    pub fn generate(curve: &Curve, num_vars: usize, seed: u64) -> Result<Self, ProverError> {
        if num_vars == 0 || num_vars > 30 {
            return Err(ProverError::BadWorkload(format!("srs size 2^{num_vars}")));
        }
        let sf = curve.scalar_field().uncounted();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tau: Vec<_> = (0..num_vars).map(|_| sf.random_nonzero(&mut rng)).collect();
        let basis = build_eq(&sf, &tau)?;

        // fixed-base table [2^j] G
        let bits = sf.bit_width() as usize;
        let mut table = Vec::with_capacity(bits);
        let mut g = curve.generator();
        for _ in 0..bits {
            table.push(g);
            g = curve.pdbl(&g);
        }
        let raw: Vec<Point> = basis
            .entries()
            .iter()
            .map(|k| {
                let mut acc = curve.identity();
                for (j, t) in table.iter().enumerate() {
                    if sf.bit(k, j as u32) {
                        acc = curve.padd(&acc, t);
                    }
                }
                acc
            })
            .collect();
        Ok(Self {
            num_vars,
            points: curve.batch_normalize(&raw),
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// First `n` points.
    pub fn prefix(&self, n: usize) -> Result<&[Point], ProverError> {
        self.points.get(..n).ok_or(ProverError::SrsTooSmall {
            need: n,
            have: self.points.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_match_scalar_mul() {
        let c = Curve::bls12_381_g1();
        let srs = Srs::generate(&c, 2, 5).unwrap();
        let sf = c.scalar_field().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tau: Vec<_> = (0..2).map(|_| sf.random_nonzero(&mut rng)).collect();
        let basis = build_eq(&sf, &tau).unwrap();
        for (p, k) in srs.prefix(4).unwrap().iter().zip(basis.entries()) {
            assert!(c.eq_points(p, &c.scalar_mul(k, &c.generator())));
            assert!(c.is_on_curve(p));
        }
        assert!(srs.prefix(5).is_err());
    }
}
