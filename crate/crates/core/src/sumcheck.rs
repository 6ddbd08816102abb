//! SumCheck over sums of products of multilinear tables.
//!
//! Round messages are evaluations `g_j(0), ..., g_j(d)` at the integer nodes.
//! Within a round every operand is expanded once per hypercube instance to as
//! many nodes as its highest-degree term needs, each term is multiplied out at
//! its own `k + 1` nodes, and lower-degree term sums are lifted to `d + 1`
//! nodes with fixed Lagrange weights at the end of the round.

use thiserror::Error;

use crate::fp::{Fe, Field, OpCounter};
use crate::mle::fix_variable_in_place;
use crate::transcript::ChallengeSource;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SumCheckError {
    #[error("composition needs {want} operand tables, got {got}")]
    OperandCount { want: usize, got: usize },
    #[error("operand {index} has {got} entries, expected {want}")]
    LengthMismatch { index: usize, want: usize, got: usize },
    #[error("tables must have at least one variable and a power-of-two length")]
    BadShape,
    #[error("cannot extend {from} evaluations down to {to}")]
    Extend { from: usize, to: usize },
    #[error("composition uses alpha but none was bound")]
    MissingAlpha,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CompositionKind {
    ZeroCheck,
    PermCheck,
    OpenCheck,
}

impl CompositionKind {
    pub fn label(self) -> &'static str {
        match self {
            CompositionKind::ZeroCheck => "zerocheck",
            CompositionKind::PermCheck => "permcheck",
            CompositionKind::OpenCheck => "opencheck",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coeff {
    Plus,
    Minus,
    Alpha,
    MinusAlpha,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: Coeff,
    pub operands: Vec<usize>,
}

impl Term {
    fn new(coeff: Coeff, operands: &[usize]) -> Self {
        Self {
            coeff,
            operands: operands.to_vec(),
        }
    }

    pub fn degree(&self) -> usize {
        self.operands.len()
    }
}

/// Operand slots of the gate-identity composition.
pub mod zc {
    pub const QL: usize = 0;
    pub const QR: usize = 1;
    pub const QM: usize = 2;
    pub const QO: usize = 3;
    pub const QC: usize = 4;
    pub const W1: usize = 5;
    pub const W2: usize = 6;
    pub const W3: usize = 7;
    pub const EQ: usize = 8;
    pub const COUNT: usize = 9;
}

/// Operand slots of the wiring-identity composition.
pub mod pc {
    pub const PI: usize = 0;
    pub const P1: usize = 1;
    pub const P2: usize = 2;
    pub const PHI: usize = 3;
    pub const D1: usize = 4;
    pub const D2: usize = 5;
    pub const D3: usize = 6;
    pub const N1: usize = 7;
    pub const N2: usize = 8;
    pub const N3: usize = 9;
    pub const EQ: usize = 10;
    pub const COUNT: usize = 11;
}

#[derive(Clone, Debug)]
pub struct Composition {
    kind: CompositionKind,
    num_operands: usize,
    terms: Vec<Term>,
    alpha: Option<Fe>,
    degree: usize,
    /// Highest degree among the terms that use each operand.
    operand_degree: Vec<usize>,
}

impl Composition {
    fn build(kind: CompositionKind, num_operands: usize, terms: Vec<Term>, alpha: Option<Fe>) -> Self {
        let degree = terms.iter().map(Term::degree).max().unwrap_or(0);
        let mut operand_degree = vec![0; num_operands];
        for t in &terms {
            for &o in &t.operands {
                operand_degree[o] = operand_degree[o].max(t.degree());
            }
        }
        Self {
            kind,
            num_operands,
            terms,
            alpha,
            degree,
            operand_degree,
        }
    }

    /// `qL w1 f + qR w2 f + qM w1 w2 f - qO w3 f + qc f`; degree 4.
    pub fn zerocheck() -> Self {
        use zc::*;
        Self::build(
            CompositionKind::ZeroCheck,
            COUNT,
            vec![
                Term::new(Coeff::Plus, &[QL, W1, EQ]),
                Term::new(Coeff::Plus, &[QR, W2, EQ]),
                Term::new(Coeff::Plus, &[QM, W1, W2, EQ]),
                Term::new(Coeff::Minus, &[QO, W3, EQ]),
                Term::new(Coeff::Plus, &[QC, EQ]),
            ],
            None,
        )
    }

    /// `pi f - p1 p2 f + alpha phi D1 D2 D3 f - alpha N1 N2 N3 f`; degree 5.
    pub fn permcheck(alpha: Fe) -> Self {
        use pc::*;
        Self::build(
            CompositionKind::PermCheck,
            COUNT,
            vec![
                Term::new(Coeff::Plus, &[PI, EQ]),
                Term::new(Coeff::Minus, &[P1, P2, EQ]),
                Term::new(Coeff::Alpha, &[PHI, D1, D2, D3, EQ]),
                Term::new(Coeff::MinusAlpha, &[N1, N2, N3, EQ]),
            ],
            Some(alpha),
        )
    }

    /// `sum_i y_i k_i` over `pairs` pairs; operands are `y_0..y_{pairs-1}`
    /// followed by `k_0..k_{pairs-1}`. Degree 2.
    pub fn opencheck(pairs: usize) -> Self {
        let terms = (0..pairs).map(|i| Term::new(Coeff::Plus, &[i, pairs + i])).collect();
        Self::build(CompositionKind::OpenCheck, 2 * pairs, terms, None)
    }

    pub fn kind(&self) -> CompositionKind {
        self.kind
    }

    pub fn num_operands(&self) -> usize {
        self.num_operands
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn alpha(&self) -> Option<Fe> {
        self.alpha
    }

    pub fn operand_degree(&self, operand: usize) -> usize {
        self.operand_degree[operand]
    }

    /// Composition value at one point given every operand's value there.
    pub fn evaluate(&self, f: &Field, values: &[Fe]) -> Result<Fe, SumCheckError> {
        if values.len() != self.num_operands {
            return Err(SumCheckError::OperandCount {
                want: self.num_operands,
                got: values.len(),
            });
        }
        let mut acc = f.zero();
        for t in &self.terms {
            let mut prod = values[t.operands[0]];
            for &o in &t.operands[1..] {
                prod = f.mul(&prod, &values[o]);
            }
            acc = self.apply_coeff(f, &acc, &prod, t.coeff)?;
        }
        Ok(acc)
    }

    fn apply_coeff(&self, f: &Field, acc: &Fe, v: &Fe, c: Coeff) -> Result<Fe, SumCheckError> {
        Ok(match c {
            Coeff::Plus => f.add(acc, v),
            Coeff::Minus => f.sub(acc, v),
            Coeff::Alpha => f.add(acc, &f.mul(&self.alpha.ok_or(SumCheckError::MissingAlpha)?, v)),
            Coeff::MinusAlpha => f.sub(acc, &f.mul(&self.alpha.ok_or(SumCheckError::MissingAlpha)?, v)),
        })
    }

    /// Modmuls per hypercube instance in [`round_evals`]: operand expansion
    /// plus term products.
    pub fn modmuls_per_instance(&self) -> u64 {
        let expand: usize = self.operand_degree.iter().map(|&d| d.saturating_sub(1)).sum();
        let products: usize = self.terms.iter().map(|t| (t.degree() + 1) * (t.degree() - 1)).sum();
        (expand + products) as u64
    }

    /// Modmuls spent once per round after accumulation: Lagrange lifting of
    /// lower-degree terms and the alpha multiplications.
    pub fn modmuls_per_round_tail(&self) -> u64 {
        let d = self.degree;
        let lift: usize = self.terms.iter().map(|t| (d - t.degree()) * (t.degree() + 1)).sum();
        let alpha = if self.alpha.is_some() { d + 1 } else { 0 };
        (lift + alpha) as u64
    }

    /// Total modmuls of [`prove`] on `num_vars` variables, excluding the
    /// table updates.
    pub fn round_modmuls(&self, num_vars: usize) -> u64 {
        let instances = (1u64 << num_vars) - 1;
        instances * self.modmuls_per_instance() + num_vars as u64 * self.modmuls_per_round_tail()
    }

    /// Modmuls of the per-round table updates over all rounds.
    pub fn update_modmuls(&self, num_vars: usize) -> u64 {
        self.num_operands as u64 * ((1u64 << num_vars) - 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumCheckProof {
    pub claimed_sum: Fe,
    pub rounds: Vec<Vec<Fe>>,
    pub final_evals: Vec<Fe>,
}

#[derive(Clone, Debug)]
pub struct ProveOutput {
    pub proof: SumCheckProof,
    pub challenges: Vec<Fe>,
    /// Modmuls spent computing each round message.
    pub round_census: Vec<u64>,
    /// Modmuls spent on table updates after each round.
    pub update_census: Vec<u64>,
}

/// Integer Lagrange coefficients `L_j(x)` for nodes `0..=m` at integer `x`.
fn lagrange_int(m: usize, x: i64) -> Vec<i64> {
    (0..=m as i64)
        .map(|j| {
            let mut num: i128 = 1;
            let mut den: i128 = 1;
            for k in 0..=m as i64 {
                if k != j {
                    num *= (x - k) as i128;
                    den *= (j - k) as i128;
                }
            }
            debug_assert_eq!(num % den, 0);
            (num / den) as i64
        })
        .collect()
}

/// Values at nodes `0..target` of the degree-`< evals.len()` polynomial
/// through `evals` at nodes `0..evals.len()`.
pub fn barycentric_extend(f: &Field, evals: &[Fe], target: usize) -> Result<Vec<Fe>, SumCheckError> {
    if evals.is_empty() || evals.len() > target {
        return Err(SumCheckError::Extend {
            from: evals.len(),
            to: target,
        });
    }
    let m = evals.len() - 1;
    let mut out = evals.to_vec();
    for x in evals.len()..target {
        let w = lagrange_int(m, x as i64);
        let mut acc = f.zero();
        for (y, c) in evals.iter().zip(w) {
            acc = f.add(&acc, &f.mul(y, &f.from_i64(c)));
        }
        out.push(acc);
    }
    Ok(out)
}

/// Value at an arbitrary field point of the polynomial given by its
/// evaluations at `0..evals.len()`.
pub fn eval_at(f: &Field, evals: &[Fe], r: &Fe) -> Fe {
    let m = evals.len();
    for (i, e) in evals.iter().enumerate() {
        if *r == f.from_u64(i as u64) {
            return *e;
        }
    }
    // L_j(r) = prod_{k != j} (r - k) / (j - k)
    let diffs: Vec<Fe> = (0..m).map(|k| f.sub(r, &f.from_u64(k as u64))).collect();
    let mut acc = f.zero();
    for (j, y) in evals.iter().enumerate() {
        let mut num = f.one();
        let mut den: i128 = 1;
        for k in 0..m {
            if k != j {
                num = f.mul(&num, &diffs[k]);
                den *= j as i128 - k as i128;
            }
        }
        let den_fe = f.from_i64(den as i64);
        let lj = f.mul(&num, &f.inv(&den_fe).expect("nonzero node gap"));
        acc = f.add(&acc, &f.mul(&lj, y));
    }
    acc
}

fn check_tables(comp: &Composition, tables: &[Vec<Fe>]) -> Result<usize, SumCheckError> {
    if tables.len() != comp.num_operands {
        return Err(SumCheckError::OperandCount {
            want: comp.num_operands,
            got: tables.len(),
        });
    }
    let n = tables[0].len();
    if n < 2 || !n.is_power_of_two() {
        return Err(SumCheckError::BadShape);
    }
    for (index, t) in tables.iter().enumerate() {
        if t.len() != n {
            return Err(SumCheckError::LengthMismatch {
                index,
                want: n,
                got: t.len(),
            });
        }
    }
    if comp
        .terms
        .iter()
        .any(|t| matches!(t.coeff, Coeff::Alpha | Coeff::MinusAlpha))
        && comp.alpha.is_none()
    {
        return Err(SumCheckError::MissingAlpha);
    }
    Ok(n)
}

/// One round message `g(0..=d)` for the current (not yet folded) tables.
pub fn round_evals(f: &Field, comp: &Composition, tables: &[Vec<Fe>]) -> Result<Vec<Fe>, SumCheckError> {
    let n = check_tables(comp, tables)?;
    let d = comp.degree;
    let nodes: Vec<Fe> = (0..=d as u64).map(|e| f.from_u64(e)).collect();
    // term_acc[t][e], e in 0..=deg(t)
    let mut term_acc: Vec<Vec<Fe>> = comp.terms.iter().map(|t| vec![f.zero(); t.degree() + 1]).collect();
    let mut vals = vec![vec![f.zero(); d + 1]; comp.num_operands];

    for i in 0..n / 2 {
        for (o, t) in tables.iter().enumerate() {
            let hi_deg = comp.operand_degree[o];
            if hi_deg == 0 {
                continue;
            }
            let lo = t[2 * i];
            let hi = t[2 * i + 1];
            let v = &mut vals[o];
            v[0] = lo;
            v[1] = hi;
            if hi_deg >= 2 {
                let diff = f.sub(&hi, &lo);
                for e in 2..=hi_deg {
                    v[e] = f.add(&f.mul(&diff, &nodes[e]), &lo);
                }
            }
        }
        for (term, acc) in comp.terms.iter().zip(term_acc.iter_mut()) {
            for (e, slot) in acc.iter_mut().enumerate() {
                let mut prod = vals[term.operands[0]][e];
                for &o in &term.operands[1..] {
                    prod = f.mul(&prod, &vals[o][e]);
                }
                *slot = f.add(slot, &prod);
            }
        }
    }
    combine_terms(f, comp, &term_acc)
}

fn combine_terms(f: &Field, comp: &Composition, term_acc: &[Vec<Fe>]) -> Result<Vec<Fe>, SumCheckError> {
    let d = comp.degree;
    let mut plain = vec![f.zero(); d + 1];
    let mut alpha_part = vec![f.zero(); d + 1];
    let mut has_alpha = false;
    for (term, acc) in comp.terms.iter().zip(term_acc) {
        let ext = barycentric_extend(f, acc, d + 1)?;
        for e in 0..=d {
            match term.coeff {
                Coeff::Plus => plain[e] = f.add(&plain[e], &ext[e]),
                Coeff::Minus => plain[e] = f.sub(&plain[e], &ext[e]),
                Coeff::Alpha => {
                    has_alpha = true;
                    alpha_part[e] = f.add(&alpha_part[e], &ext[e]);
                }
                Coeff::MinusAlpha => {
                    has_alpha = true;
                    alpha_part[e] = f.sub(&alpha_part[e], &ext[e]);
                }
            }
        }
    }
    if has_alpha {
        let alpha = comp.alpha.ok_or(SumCheckError::MissingAlpha)?;
        for e in 0..=d {
            plain[e] = f.add(&plain[e], &f.mul(&alpha, &alpha_part[e]));
        }
    }
    Ok(plain)
}

/// Reference implementation that re-expands every operand for every term and
/// evaluates all terms at all `d + 1` nodes. Used as a differential oracle.
pub fn round_evals_naive(f: &Field, comp: &Composition, tables: &[Vec<Fe>]) -> Result<Vec<Fe>, SumCheckError> {
    let n = check_tables(comp, tables)?;
    let d = comp.degree;
    let mut g = vec![f.zero(); d + 1];
    for (e, ge) in g.iter_mut().enumerate() {
        let x = f.from_u64(e as u64);
        for i in 0..n / 2 {
            let point: Vec<Fe> = tables
                .iter()
                .map(|t| f.add(&f.mul(&f.sub(&t[2 * i + 1], &t[2 * i]), &x), &t[2 * i]))
                .collect();
            *ge = f.add(ge, &comp.evaluate(f, &point)?);
        }
    }
    Ok(g)
}

/// Hypercube sum of the composition, entry by entry.
pub fn brute_force_sum(f: &Field, comp: &Composition, tables: &[Vec<Fe>]) -> Result<Fe, SumCheckError> {
    let n = check_tables(comp, tables)?;
    let mut acc = f.zero();
    for i in 0..n {
        let point: Vec<Fe> = tables.iter().map(|t| t[i]).collect();
        acc = f.add(&acc, &comp.evaluate(f, &point)?);
    }
    Ok(acc)
}

fn label(comp: &Composition, what: &str) -> Vec<u8> {
    format!("{}/{}", comp.kind.label(), what).into_bytes()
}

/// Runs all rounds, absorbing `H`, each round message and the final operand
/// values into `chal`.
pub fn prove<C: ChallengeSource + ?Sized>(
    f: &Field,
    comp: &Composition,
    mut tables: Vec<Vec<Fe>>,
    chal: &mut C,
) -> Result<ProveOutput, SumCheckError> {
    let n = check_tables(comp, &tables)?;
    let num_vars = n.trailing_zeros() as usize;
    let local = OpCounter::new();
    let fc = f.with_counter(&local);

    let mut rounds = Vec::with_capacity(num_vars);
    let mut challenges = Vec::with_capacity(num_vars);
    let mut round_census = Vec::with_capacity(num_vars);
    let mut update_census = Vec::with_capacity(num_vars);
    let mut claimed_sum = None;

    for _ in 0..num_vars {
        local.reset();
        let g = round_evals(&fc, comp, &tables)?;
        round_census.push(local.take());
        if claimed_sum.is_none() {
            let h = f.add(&g[0], &g[1]);
            chal.absorb_fes(&label(comp, "claimed_sum"), f, &[h]);
            claimed_sum = Some(h);
        }
        chal.absorb_fes(&label(comp, "round"), f, &g);
        let r = chal.challenge(&label(comp, "challenge"));
        for t in tables.iter_mut() {
            fix_variable_in_place(&fc, t, &r);
        }
        update_census.push(local.take());
        rounds.push(g);
        challenges.push(r);
    }
    if let Some(outer) = f.counter() {
        outer.add(round_census.iter().sum::<u64>() + update_census.iter().sum::<u64>());
    }
    let final_evals: Vec<Fe> = tables.iter().map(|t| t[0]).collect();
    chal.absorb_fes(&label(comp, "final"), f, &final_evals);
    Ok(ProveOutput {
        proof: SumCheckProof {
            claimed_sum: claimed_sum.expect("at least one round"),
            rounds,
            final_evals,
        },
        challenges,
        round_census,
        update_census,
    })
}

/// Which check rejected a proof. Rounds are numbered from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rejection {
    /// Round message has the wrong number of evaluations.
    Shape { round: usize },
    /// `g_1(0) + g_1(1) != H`.
    ClaimedSum,
    /// `g_j(0) + g_j(1) != g_{j-1}(r_{j-1})`.
    RoundSum { round: usize },
    /// `g_mu(r_mu)` differs from the composition of the final values.
    FinalValue,
    /// Final values disagree with the external oracle.
    FinalOracle { operand: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verified {
    pub challenges: Vec<Fe>,
}

/// Replays the transcript and checks every round. `final_oracle`, when
/// given, receives the challenge point and returns each operand's value there.
pub fn verify<C, O>(
    f: &Field,
    comp: &Composition,
    proof: &SumCheckProof,
    num_vars: usize,
    chal: &mut C,
    final_oracle: Option<O>,
) -> Result<Verified, Rejection>
where
    C: ChallengeSource + ?Sized,
    O: FnOnce(&[Fe]) -> Vec<Fe>,
{
    let d = comp.degree;
    if proof.rounds.len() != num_vars || num_vars == 0 {
        return Err(Rejection::Shape {
            round: proof.rounds.len().min(num_vars) + 1,
        });
    }
    if proof.final_evals.len() != comp.num_operands {
        return Err(Rejection::FinalValue);
    }
    let mut expected = proof.claimed_sum;
    let mut challenges = Vec::with_capacity(num_vars);
    for (j, g) in proof.rounds.iter().enumerate() {
        if g.len() != d + 1 {
            return Err(Rejection::Shape { round: j + 1 });
        }
        if j == 0 {
            chal.absorb_fes(&label(comp, "claimed_sum"), f, &[proof.claimed_sum]);
        }
        if f.add(&g[0], &g[1]) != expected {
            return Err(if j == 0 {
                Rejection::ClaimedSum
            } else {
                Rejection::RoundSum { round: j + 1 }
            });
        }
        chal.absorb_fes(&label(comp, "round"), f, g);
        let r = chal.challenge(&label(comp, "challenge"));
        expected = eval_at(f, g, &r);
        challenges.push(r);
    }
    chal.absorb_fes(&label(comp, "final"), f, &proof.final_evals);
    let composed = comp
        .evaluate(f, &proof.final_evals)
        .map_err(|_| Rejection::FinalValue)?;
    if composed != expected {
        return Err(Rejection::FinalValue);
    }
    if let Some(oracle) = final_oracle {
        let want = oracle(&challenges);
        for (operand, (a, b)) in want.iter().zip(&proof.final_evals).enumerate() {
            if a != b {
                return Err(Rejection::FinalOracle { operand });
            }
        }
        if want.len() != proof.final_evals.len() {
            return Err(Rejection::FinalOracle {
                operand: want.len().min(proof.final_evals.len()),
            });
        }
    }
    Ok(Verified { challenges })
}

/// Absorbs `proof` into `chal` exactly as [`prove`] did and returns the
/// challenges, without checking anything.
pub fn replay<C: ChallengeSource + ?Sized>(
    f: &Field,
    kind: CompositionKind,
    proof: &SumCheckProof,
    chal: &mut C,
) -> Vec<Fe> {
    let lab = |what: &str| format!("{}/{}", kind.label(), what).into_bytes();
    let mut out = Vec::with_capacity(proof.rounds.len());
    for (j, g) in proof.rounds.iter().enumerate() {
        if j == 0 {
            chal.absorb_fes(&lab("claimed_sum"), f, &[proof.claimed_sum]);
        }
        chal.absorb_fes(&lab("round"), f, g);
        out.push(chal.challenge(&lab("challenge")));
    }
    chal.absorb_fes(&lab("final"), f, &proof.final_evals);
    out
}

/// Type hint for calling [`verify`] without an oracle.
pub type NoOracle = fn(&[Fe]) -> Vec<Fe>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transcript::{ScriptedChallenges, Transcript};

    fn f97() -> Field {
        Field::from_u64_modulus(97).unwrap()
    }

    fn fes(f: &Field, v: &[u64]) -> Vec<Fe> {
        v.iter().map(|&x| f.from_u64(x)).collect()
    }

    #[test]
    fn opencheck_hand_example() {
        let f = f97();
        let comp = Composition::opencheck(1);
        let tables = vec![fes(&f, &[1, 2]), fes(&f, &[3, 4])];
        let g = round_evals(&f, &comp, &tables).unwrap();
        assert_eq!(g, fes(&f, &[3, 8, 15]));
        let mut chal = ScriptedChallenges::new(vec![f.from_u64(5)]);
        let out = prove(&f, &comp, tables, &mut chal).unwrap();
        assert_eq!(out.proof.claimed_sum, f.from_u64(11));
        assert_eq!(out.proof.final_evals, fes(&f, &[6, 8]));
        assert_eq!(eval_at(&f, &out.proof.rounds[0], &f.from_u64(5)), f.from_u64(48));
    }

    #[test]
    fn extend_examples() {
        let f = f97();
        assert_eq!(
            barycentric_extend(&f, &fes(&f, &[3, 8]), 3).unwrap(),
            fes(&f, &[3, 8, 13])
        );
        assert_eq!(
            barycentric_extend(&f, &fes(&f, &[1, 4, 9]), 4).unwrap(),
            fes(&f, &[1, 4, 9, 16])
        );
        assert_eq!(barycentric_extend(&f, &fes(&f, &[5]), 4).unwrap(), fes(&f, &[5; 4]));
        assert!(barycentric_extend(&f, &fes(&f, &[1, 2, 3]), 2).is_err());
    }

    #[test]
    fn zero_tables_give_zero_messages() {
        let f = f97();
        for comp in [
            Composition::zerocheck(),
            Composition::permcheck(f.from_u64(3)),
            Composition::opencheck(6),
        ] {
            let tables = vec![vec![f.zero(); 8]; comp.num_operands()];
            let mut chal = Transcript::new(&f);
            let out = prove(&f, &comp, tables, &mut chal).unwrap();
            for g in &out.proof.rounds {
                assert!(g.iter().all(Fe::is_zero));
            }
        }
    }

    #[test]
    fn census_per_instance() {
        assert_eq!(Composition::zerocheck().modmuls_per_instance(), 63);
        assert_eq!(Composition::opencheck(6).modmuls_per_instance(), 30);
        let f = f97();
        assert_eq!(Composition::permcheck(f.one()).modmuls_per_instance(), 84);
        assert_eq!(Composition::zerocheck().degree(), 4);
        assert_eq!(Composition::permcheck(f.one()).degree(), 5);
        assert_eq!(Composition::opencheck(6).degree(), 2);
    }

    #[test]
    fn verify_rejections() {
        let f = Field::bls12_381_scalar();
        let comp = Composition::opencheck(2);
        let mut rng_t = Transcript::new(&f);
        let tables: Vec<Vec<Fe>> = (0..4)
            .map(|i| (0..8).map(|j| f.from_u64(3 * i + j + 1)).collect())
            .collect();
        let out = prove(&f, &comp, tables, &mut rng_t).unwrap();
        let ok = verify(&f, &comp, &out.proof, 3, &mut Transcript::new(&f), None::<NoOracle>);
        assert_eq!(ok.unwrap().challenges, out.challenges);

        let mut bad = out.proof.clone();
        bad.claimed_sum = f.add(&bad.claimed_sum, &f.one());
        assert_eq!(
            verify(&f, &comp, &bad, 3, &mut Transcript::new(&f), None::<NoOracle>),
            Err(Rejection::ClaimedSum)
        );
        let mut bad = out.proof.clone();
        bad.rounds[1][2] = f.add(&bad.rounds[1][2], &f.one());
        // changing g_2(2) leaves g_2(0)+g_2(1) intact but moves g_2(r_2)
        assert_eq!(
            verify(&f, &comp, &bad, 3, &mut Transcript::new(&f), None::<NoOracle>),
            Err(Rejection::RoundSum { round: 3 })
        );
        let mut bad = out.proof.clone();
        bad.rounds[1][0] = f.add(&bad.rounds[1][0], &f.one());
        assert_eq!(
            verify(&f, &comp, &bad, 3, &mut Transcript::new(&f), None::<NoOracle>),
            Err(Rejection::RoundSum { round: 2 })
        );
        let mut bad = out.proof.clone();
        bad.final_evals[0] = f.add(&bad.final_evals[0], &f.one());
        assert_eq!(
            verify(&f, &comp, &bad, 3, &mut Transcript::new(&f), None::<NoOracle>),
            Err(Rejection::FinalValue)
        );
    }
}
