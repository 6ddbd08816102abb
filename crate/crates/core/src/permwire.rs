//! Wiring-identity tables: numerator and denominator construction, the
//! fraction table `phi = N / D`, and the product table `pi`.
//!
//! Wire slot `(c, i)` (column `c` in 0..3, gate `i`) has index `c * n + i`.
//! `N_c[i] = w_c[i] + beta * id_c[i] + gamma` and
//! `D_c[i] = w_c[i] + beta * sigma_c[i] + gamma`.
//!
//! Product layout over `n = 2^mu` entries: `v = phi || pi`, so the selector
//! of `v` is its highest variable. `pi[0..n/2]` is the first product layer of
//! `phi`, each following layer is appended, the total product lands in
//! `pi[n-2]` and `pi[n-1] = 0`. With `p1[i] = v[2i]` and `p2[i] = v[2i+1]`
//! the relation `pi[i] = p1[i] * p2[i]` holds for every `i`.

use thiserror::Error;

use crate::fp::{Fe, Field, FieldError};

pub const DEFAULT_BATCH: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("wiring tables have inconsistent lengths")]
    LengthMismatch,
    #[error("denominator is zero at index {index}")]
    ZeroDenominator { index: usize },
    #[error("sigma is not a permutation of the 3n wire slots")]
    NotPermutation,
    #[error("table length {0} is not a power of two >= 2")]
    BadLength(usize),
    #[error("batch size must be at least 1")]
    BadBatch,
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub struct WiringInputs<'a> {
    pub w: [&'a [Fe]; 3],
    pub sigma: [&'a [Fe]; 3],
    pub id: [&'a [Fe]; 3],
    pub beta: Fe,
    pub gamma: Fe,
}

#[derive(Clone, Debug)]
pub struct NdTables {
    pub n_parts: [Vec<Fe>; 3],
    pub d_parts: [Vec<Fe>; 3],
    pub n: Vec<Fe>,
    pub d: Vec<Fe>,
}

#[derive(Clone, Debug)]
pub struct ProductTables {
    /// `phi || pi`, `2n` entries.
    pub v: Vec<Fe>,
    pub pi: Vec<Fe>,
    pub p1: Vec<Fe>,
    pub p2: Vec<Fe>,
}

impl ProductTables {
    /// Slot holding the product of all `phi` entries.
    pub fn root_index(&self) -> usize {
        self.pi.len() - 2
    }

    pub fn root(&self) -> Fe {
        self.pi[self.root_index()]
    }
}

/// `id_c[i] = c * n + i`.
pub fn identity_tables(f: &Field, n: usize) -> [Vec<Fe>; 3] {
    std::array::from_fn(|c| (0..n).map(|i| f.from_u64((c * n + i) as u64)).collect())
}

/// Checks that the three sigma tables hold each slot index in `0..3n` once.
pub fn check_permutation(f: &Field, sigma: [&[Fe]; 3]) -> Result<(), PermError> {
    let n = sigma[0].len();
    if sigma.iter().any(|s| s.len() != n) {
        return Err(PermError::LengthMismatch);
    }
    let mut seen = vec![false; 3 * n];
    for s in sigma {
        for v in s {
            let x = f.to_biguint(v);
            let idx: usize = x.try_into().map_err(|_| PermError::NotPermutation)?;
            if idx >= 3 * n || seen[idx] {
                return Err(PermError::NotPermutation);
            }
            seen[idx] = true;
        }
    }
    Ok(())
}

/// Builds `N_c`, `D_c` and their products; 10 modmuls per index.
pub fn construct_nd(f: &Field, inp: &WiringInputs) -> Result<NdTables, PermError> {
    let n = inp.w[0].len();
    for c in 0..3 {
        if inp.w[c].len() != n || inp.sigma[c].len() != n || inp.id[c].len() != n {
            return Err(PermError::LengthMismatch);
        }
    }
    let term = |w: &Fe, idx: &Fe| f.add(&f.add(w, &f.mul(&inp.beta, idx)), &inp.gamma);
    let n_parts: [Vec<Fe>; 3] = std::array::from_fn(|c| (0..n).map(|i| term(&inp.w[c][i], &inp.id[c][i])).collect());
    let d_parts: [Vec<Fe>; 3] = std::array::from_fn(|c| (0..n).map(|i| term(&inp.w[c][i], &inp.sigma[c][i])).collect());
    let prod3 = |p: &[Vec<Fe>; 3], i: usize| f.mul(&f.mul(&p[0][i], &p[1][i]), &p[2][i]);
    let nn = (0..n).map(|i| prod3(&n_parts, i)).collect();
    let dd = (0..n).map(|i| prod3(&d_parts, i)).collect();
    Ok(NdTables {
        n_parts,
        d_parts,
        n: nn,
        d: dd,
    })
}

/// `phi[i] = N[i] / D[i]`, inverting `D` in chunks of `batch` with one
/// constant-time inversion per chunk.
pub fn frac_mle(f: &Field, num: &[Fe], den: &[Fe], batch: usize) -> Result<Vec<Fe>, PermError> {
    if num.len() != den.len() {
        return Err(PermError::LengthMismatch);
    }
    if batch == 0 {
        return Err(PermError::BadBatch);
    }
    if let Some(index) = den.iter().position(Fe::is_zero) {
        return Err(PermError::ZeroDenominator { index });
    }
    let mut out = Vec::with_capacity(num.len());
    for (nc, dc) in num.chunks(batch).zip(den.chunks(batch)) {
        let inv = f.batch_inverse(dc)?;
        out.extend(nc.iter().zip(&inv).map(|(a, b)| f.mul(a, b)));
    }
    Ok(out)
}

/// Product tables for `phi`; `n - 1` modmuls.
pub fn build_product(f: &Field, phi: &[Fe]) -> Result<ProductTables, PermError> {
    let n = phi.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(PermError::BadLength(n));
    }
    let mut pi: Vec<Fe> = phi.chunks_exact(2).map(|p| f.mul(&p[0], &p[1])).collect();
    let mut start = 0usize;
    while pi.len() - start > 1 {
        let end = pi.len();
        for j in (start..end).step_by(2) {
            let v = f.mul(&pi[j], &pi[j + 1]);
            pi.push(v);
        }
        start = end;
    }
    pi.push(f.zero());
    let mut v = phi.to_vec();
    v.extend_from_slice(&pi);
    let p1 = (0..n).map(|i| v[2 * i]).collect();
    let p2 = (0..n).map(|i| v[2 * i + 1]).collect();
    Ok(ProductTables { v, pi, p1, p2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fes(f: &Field, v: &[u64]) -> Vec<Fe> {
        v.iter().map(|&x| f.from_u64(x)).collect()
    }

    #[test]
    fn frac_example() {
        let f = Field::from_u64_modulus(17).unwrap();
        let phi = frac_mle(&f, &fes(&f, &[4, 3]), &fes(&f, &[2, 3]), 64).unwrap();
        assert_eq!(phi, fes(&f, &[2, 1]));
        assert_eq!(
            frac_mle(&f, &fes(&f, &[4, 3]), &fes(&f, &[2, 0]), 64),
            Err(PermError::ZeroDenominator { index: 1 })
        );
    }

    #[test]
    fn product_example() {
        let f = Field::from_u64_modulus(97).unwrap();
        let t = build_product(&f, &fes(&f, &[2, 3, 4, 5])).unwrap();
        assert_eq!(t.pi, fes(&f, &[6, 20, 23, 0]));
        assert_eq!(t.root(), f.from_u64(23));
        for i in 0..4 {
            assert_eq!(t.pi[i], f.mul(&t.p1[i], &t.p2[i]));
        }
    }

    #[test]
    fn nd_hand_example() {
        let f = Field::from_u64_modulus(97).unwrap();
        let w1 = fes(&f, &[2, 3]);
        let ones = fes(&f, &[1, 1]);
        let id = identity_tables(&f, 2);
        // sigma swaps slot 0 with slot 2 (column 1, gate 0)
        let s0 = fes(&f, &[2, 1]);
        let s1 = fes(&f, &[0, 3]);
        let inp = WiringInputs {
            w: [&w1, &ones, &ones],
            sigma: [&s0, &s1, &id[2]],
            id: [&id[0], &id[1], &id[2]],
            beta: f.one(),
            gamma: f.one(),
        };
        let nd = construct_nd(&f, &inp).unwrap();
        assert_eq!(nd.d_parts[0], fes(&f, &[2 + 2 + 1, 3 + 1 + 1]));
        assert_eq!(nd.n_parts[0], fes(&f, &[2 + 1, 3 + 1 + 1]));
        check_permutation(&f, [&s0, &s1, &id[2]]).unwrap();
        assert_eq!(
            check_permutation(&f, [&s0, &s0, &id[2]]),
            Err(PermError::NotPermutation)
        );
    }
}
