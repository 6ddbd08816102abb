//! Proof bundle and its versioned binary encoding.
//!
//! Layout (integers little-endian):
//!
//! ```text
//! magic "ZKSPBNDL" | u16 version | u16 scalar_len | u16 point_len | u32 mu | u8 flags
//! 5 points: w1 w2 w3 phi pi
//! 3 sumcheck proofs: scalar H | u32 rounds | u32 width | rounds*width scalars
//!                    | u32 finals | finals scalars
//! u32 evals | evals scalars
//! u32 openings | openings points
//! 32-byte transcript digest
//! ```

use thiserror::Error;

use crate::ec::{Curve, Point};
use crate::fp::{Fe, Field};
use crate::sumcheck::SumCheckProof;

pub const BUNDLE_MAGIC: &[u8; 8] = b"ZKSPBNDL";
pub const BUNDLE_VERSION: u16 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BundleError {
    #[error("input ends early")]
    Truncated,
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported bundle version {0}")]
    UnsupportedVersion(u16),
    #[error("element sizes do not match the curve")]
    ParamMismatch,
    #[error("non-canonical scalar")]
    Scalar,
    #[error("invalid point encoding")]
    Point,
    #[error("{0} trailing bytes")]
    Trailing(usize),
    #[error("unknown flag bits {0:#x}")]
    Flags(u8),
    #[error("mu {0} out of range")]
    Mu(u32),
}

#[derive(Clone, Debug)]
pub struct ProofBundle {
    pub mu: u32,
    pub witness_commitments: [Point; 3],
    pub phi_commitment: Point,
    pub pi_commitment: Point,
    pub zerocheck: SumCheckProof,
    pub permcheck: SumCheckProof,
    pub opencheck: SumCheckProof,
    /// Claimed evaluations in the order of [`super::EVAL_SCHEDULE`].
    pub batch_evals: Vec<Fe>,
    /// One commitment per opening level.
    pub opening: Vec<Point>,
    /// Set when the first `(beta, gamma)` hit a zero denominator.
    pub beta_resampled: bool,
    pub transcript_digest: [u8; 32],
}

struct Writer<'a> {
    curve: &'a Curve,
    sf: &'a Field,
    out: Vec<u8>,
}

impl Writer<'_> {
    fn u32(&mut self, v: u32) {
        self.out.extend_from_slice(&v.to_le_bytes());
    }

    fn scalar(&mut self, x: &Fe) {
        self.out.extend_from_slice(&self.sf.to_bytes_le(x));
    }

    fn scalars(&mut self, xs: &[Fe]) {
        for x in xs {
            self.scalar(x);
        }
    }

    fn point(&mut self, p: &Point) {
        self.out.extend_from_slice(&self.curve.encode_point(p));
    }

    fn sumcheck(&mut self, p: &SumCheckProof) {
        self.scalar(&p.claimed_sum);
        self.u32(p.rounds.len() as u32);
        self.u32(p.rounds.first().map_or(0, Vec::len) as u32);
        for r in &p.rounds {
            self.scalars(r);
        }
        self.u32(p.final_evals.len() as u32);
        self.scalars(&p.final_evals);
    }
}

struct Reader<'a> {
    curve: &'a Curve,
    sf: &'a Field,
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], BundleError> {
        if self.buf.len() < n {
            return Err(BundleError::Truncated);
        }
        let (head, rest) = self.buf.split_at(n);
        self.buf = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, BundleError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, BundleError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32, BundleError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    /// A count of `elem`-byte items, rejected early if the input cannot hold them.
    fn count(&mut self, elem: usize) -> Result<usize, BundleError> {
        let n = self.u32()? as usize;
        if n.saturating_mul(elem) > self.buf.len() {
            return Err(BundleError::Truncated);
        }
        Ok(n)
    }

    fn scalar(&mut self) -> Result<Fe, BundleError> {
        let b = self.take(self.sf.byte_len())?;
        self.sf.from_bytes_le(b).map_err(|_| BundleError::Scalar)
    }

    fn scalars(&mut self, n: usize) -> Result<Vec<Fe>, BundleError> {
        (0..n).map(|_| self.scalar()).collect()
    }

    fn point(&mut self) -> Result<Point, BundleError> {
        let b = self.take(self.curve.encoded_len())?;
        self.curve.decode_point(b).map_err(|_| BundleError::Point)
    }

    fn sumcheck(&mut self) -> Result<SumCheckProof, BundleError> {
        let s = self.sf.byte_len();
        let claimed_sum = self.scalar()?;
        let rounds = self.u32()? as usize;
        let width = self.u32()? as usize;
        if rounds.saturating_mul(width).saturating_mul(s) > self.buf.len() {
            return Err(BundleError::Truncated);
        }
        let rounds = (0..rounds)
            .map(|_| self.scalars(width))
            .collect::<Result<Vec<_>, _>>()?;
        let finals = self.count(s)?;
        let final_evals = self.scalars(finals)?;
        Ok(SumCheckProof {
            claimed_sum,
            rounds,
            final_evals,
        })
    }
}

impl ProofBundle {
    pub fn encode(&self, curve: &Curve) -> Vec<u8> {
        let sf = curve.scalar_field();
        let mut w = Writer {
            curve,
            sf,
            out: Vec::new(),
        };
        w.out.extend_from_slice(BUNDLE_MAGIC);
        w.out.extend_from_slice(&BUNDLE_VERSION.to_le_bytes());
        w.out.extend_from_slice(&(sf.byte_len() as u16).to_le_bytes());
        w.out.extend_from_slice(&(curve.encoded_len() as u16).to_le_bytes());
        w.u32(self.mu);
        w.out.push(self.beta_resampled as u8);
        for p in &self.witness_commitments {
            w.point(p);
        }
        w.point(&self.phi_commitment);
        w.point(&self.pi_commitment);
        w.sumcheck(&self.zerocheck);
        w.sumcheck(&self.permcheck);
        w.sumcheck(&self.opencheck);
        w.u32(self.batch_evals.len() as u32);
        w.scalars(&self.batch_evals);
        w.u32(self.opening.len() as u32);
        for p in &self.opening {
            w.point(p);
        }
        w.out.extend_from_slice(&self.transcript_digest);
        w.out
    }

    pub fn decode(curve: &Curve, bytes: &[u8]) -> Result<Self, BundleError> {
        let sf = curve.scalar_field();
        let mut r = Reader { curve, sf, buf: bytes };
        if r.take(8)? != BUNDLE_MAGIC {
            return Err(BundleError::BadMagic);
        }
        let version = r.u16()?;
        if version != BUNDLE_VERSION {
            return Err(BundleError::UnsupportedVersion(version));
        }
        if r.u16()? as usize != sf.byte_len() || r.u16()? as usize != curve.encoded_len() {
            return Err(BundleError::ParamMismatch);
        }
        let mu = r.u32()?;
        if !(1..=30).contains(&mu) {
            return Err(BundleError::Mu(mu));
        }
        let flags = r.u8()?;
        if flags & !1 != 0 {
            return Err(BundleError::Flags(flags));
        }
        let witness_commitments = [r.point()?, r.point()?, r.point()?];
        let phi_commitment = r.point()?;
        let pi_commitment = r.point()?;
        let zerocheck = r.sumcheck()?;
        let permcheck = r.sumcheck()?;
        let opencheck = r.sumcheck()?;
        let n = r.count(sf.byte_len())?;
        let batch_evals = r.scalars(n)?;
        let n = r.count(curve.encoded_len())?;
        let opening = (0..n).map(|_| r.point()).collect::<Result<Vec<_>, _>>()?;
        let transcript_digest: [u8; 32] = r.take(32)?.try_into().expect("32 bytes");
        if !r.buf.is_empty() {
            return Err(BundleError::Trailing(r.buf.len()));
        }
        Ok(Self {
            mu,
            witness_commitments,
            phi_commitment,
            pi_commitment,
            zerocheck,
            permcheck,
            opencheck,
            batch_evals,
            opening,
            beta_resampled: flags & 1 == 1,
            transcript_digest,
        })
    }
}
