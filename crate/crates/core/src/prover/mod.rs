//! HyperPlonk proof generation over a mock circuit, with per-kernel
//! modmul accounting and a self-verifier that has access to the circuit.
//!
//! Protocol steps, in transcript order:
//!
//! 1. commit `w1, w2, w3` (sparse MSM);
//! 2. gate identity SumCheck against `eq(r_zc)`;
//! 3. `beta, gamma`, build `N, D, phi, pi`, commit `phi` and `pi`, draw
//!    `alpha` and run the wiring SumCheck against `eq(r_pc)`;
//! 4. 22 claimed evaluations of 13 tables at 6 points;
//! 5. combine the evaluations with powers of one challenge, prove them with
//!    an opening SumCheck, and commit the quotient ladder of the combined
//!    table at the opening SumCheck's challenges.

mod bundle;
mod circuit;
mod srs;

use std::collections::BTreeMap;

use thiserror::Error;

pub use bundle::{BundleError, ProofBundle, BUNDLE_MAGIC, BUNDLE_VERSION};
pub use circuit::{gen_mock_circuit, MockCircuit, Workload};
pub use srs::Srs;

use crate::ec::{Curve, Point};
use crate::fp::{Fe, Field, FieldError, OpCounter};
use crate::mle::{build_eq, evaluate, fix_variable_in_place, MleError, MleTable};
use crate::msm::{msm_naive, msm_sparse, pippenger, MsmError, OpLog, PippengerConfig, SparsityTally};
use crate::permwire::{
    build_product, construct_nd, frac_mle, NdTables, PermError, ProductTables, WiringInputs, DEFAULT_BATCH,
};
use crate::sumcheck::{self, pc, Composition, CompositionKind, Rejection, SumCheckError};
use crate::transcript::{ChallengeSource, Transcript};

pub const DOMAIN: &[u8] = b"zkspeed/hyperplonk/v1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProverError {
    #[error("bad workload: {0}")]
    BadWorkload(String),
    #[error("SRS has {have} points, need {need}")]
    SrsTooSmall { need: usize, have: usize },
    #[error("zero denominator after resampling beta and gamma")]
    ZeroDenominator,
    #[error("bundle shape does not match the circuit: {0}")]
    Shape(&'static str),
    #[error(transparent)]
    Mle(#[from] MleError),
    #[error(transparent)]
    SumCheck(#[from] SumCheckError),
    #[error(transparent)]
    Msm(#[from] MsmError),
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// The 13 committed or public tables that get evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Poly {
    Ql,
    Qr,
    Qm,
    Qo,
    Qc,
    W1,
    W2,
    W3,
    S1,
    S2,
    S3,
    Phi,
    Pi,
}

/// Evaluation points. `PermLow`/`PermHigh` are the wiring SumCheck point
/// with its last coordinate dropped and `0`/`1` prepended; together they
/// give `p1` and `p2` there. `Root` is `(0, 1, ..., 1)`, `Last` is all ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EvalPoint {
    ZeroCheck,
    PermCheck,
    PermLow,
    PermHigh,
    Root,
    Last,
}

pub const NUM_EVAL_POINTS: usize = 6;

impl EvalPoint {
    pub fn index(self) -> usize {
        self as usize
    }
}

pub const EVAL_SCHEDULE: [(EvalPoint, Poly); 22] = {
    use EvalPoint::*;
    use Poly::*;
    [
        (ZeroCheck, Ql),
        (ZeroCheck, Qr),
        (ZeroCheck, Qm),
        (ZeroCheck, Qo),
        (ZeroCheck, Qc),
        (ZeroCheck, W1),
        (ZeroCheck, W2),
        (ZeroCheck, W3),
        (PermCheck, Phi),
        (PermCheck, Pi),
        (PermCheck, W1),
        (PermCheck, W2),
        (PermCheck, W3),
        (PermCheck, S1),
        (PermCheck, S2),
        (PermCheck, S3),
        (PermLow, Phi),
        (PermLow, Pi),
        (PermHigh, Phi),
        (PermHigh, Pi),
        (Root, Pi),
        (Last, Pi),
    ]
};

fn eval_index(point: EvalPoint, poly: Poly) -> usize {
    EVAL_SCHEDULE
        .iter()
        .position(|&e| e == (point, poly))
        .expect("scheduled evaluation")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kernel {
    WitnessMsm,
    WiringMsm,
    OpenMsm,
    ZeroCheck,
    PermCheck,
    OpenCheck,
    MleUpdate,
    BuildEq,
    NdConstruct,
    FracMle,
    ProductMle,
    BatchEval,
    /// Combining tables in the opening step, including the ladder folds.
    MleCombine,
}

impl Kernel {
    pub const ALL: [Kernel; 13] = [
        Kernel::WitnessMsm,
        Kernel::WiringMsm,
        Kernel::OpenMsm,
        Kernel::ZeroCheck,
        Kernel::PermCheck,
        Kernel::OpenCheck,
        Kernel::MleUpdate,
        Kernel::BuildEq,
        Kernel::NdConstruct,
        Kernel::FracMle,
        Kernel::ProductMle,
        Kernel::BatchEval,
        Kernel::MleCombine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kernel::WitnessMsm => "witness_msm",
            Kernel::WiringMsm => "wiring_msm",
            Kernel::OpenMsm => "open_msm",
            Kernel::ZeroCheck => "zerocheck",
            Kernel::PermCheck => "permcheck",
            Kernel::OpenCheck => "opencheck",
            Kernel::MleUpdate => "mle_update",
            Kernel::BuildEq => "build_eq",
            Kernel::NdConstruct => "nd_construct",
            Kernel::FracMle => "frac_mle",
            Kernel::ProductMle => "product_mle",
            Kernel::BatchEval => "batch_eval",
            Kernel::MleCombine => "mle_combine",
        }
    }

    pub fn is_msm(self) -> bool {
        matches!(self, Kernel::WitnessMsm | Kernel::WiringMsm | Kernel::OpenMsm)
    }
}

/// Instrumented operation counts. MSM kernels count base-field modmuls and
/// point additions; every other kernel counts scalar-field modmuls.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Census {
    pub modmuls: BTreeMap<Kernel, u64>,
    pub padds: BTreeMap<Kernel, u64>,
    /// Batched inversions performed by the fraction kernel.
    pub inversions: u64,
    /// Scalars of each witness MSM, by class.
    pub witness_tallies: Vec<SparsityTally>,
    /// Scalars of the `phi` and `pi` commitments, by class.
    pub wiring_tallies: Vec<SparsityTally>,
}

impl Census {
    fn add(&mut self, k: Kernel, modmuls: u64) {
        *self.modmuls.entry(k).or_insert(0) += modmuls;
    }

    fn add_padds(&mut self, k: Kernel, padds: u64) {
        *self.padds.entry(k).or_insert(0) += padds;
    }

    pub fn modmuls(&self, k: Kernel) -> u64 {
        self.modmuls.get(&k).copied().unwrap_or(0)
    }

    pub fn padds(&self, k: Kernel) -> u64 {
        self.padds.get(&k).copied().unwrap_or(0)
    }

    /// Scalar-field modmuls outside the MSM kernels.
    pub fn scalar_modmuls(&self) -> u64 {
        self.modmuls.iter().filter(|(k, _)| !k.is_msm()).map(|(_, v)| v).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProverKnobs {
    /// Inversion batch size of the fraction kernel.
    pub batch_size: usize,
    /// Bucket aggregation group size.
    pub group_size: usize,
    /// Fixed Pippenger window; `None` scales it with the MSM size.
    pub window: Option<u32>,
}

impl Default for ProverKnobs {
    fn default() -> Self {
        Self {
            batch_size: DEFAULT_BATCH,
            group_size: 16,
            window: None,
        }
    }
}

impl ProverKnobs {
    fn msm_config(&self, n: usize) -> PippengerConfig {
        let mut cfg = PippengerConfig::for_size(n);
        if let Some(w) = self.window {
            cfg.window = w;
        }
        cfg.group_size = self.group_size;
        cfg
    }
}

#[derive(Clone, Debug)]
pub struct ProveOutput {
    pub bundle: ProofBundle,
    pub census: Census,
}

/// Per-kernel counters wrapped around one field and one curve.
struct Meter {
    counter: OpCounter,
    padds: OpCounter,
}

impl Meter {
    fn new() -> Self {
        Self {
            counter: OpCounter::new(),
            padds: OpCounter::new(),
        }
    }

    fn field(&self, f: &Field) -> Field {
        f.with_counter(&self.counter)
    }

    fn curve(&self, c: &Curve) -> Curve {
        c.instrumented(&self.counter, &self.padds)
    }

    fn charge(&self, census: &mut Census, k: Kernel) {
        census.add(k, self.counter.take());
        let p = self.padds.take();
        if p > 0 {
            census.add_padds(k, p);
        }
    }
}

fn begin_transcript(f: &Field, circuit: &MockCircuit) -> Transcript {
    let mut t = Transcript::with_domain(f, DOMAIN);
    t.absorb(b"circuit", &circuit.digest(f));
    t.absorb(b"mu", &(circuit.mu as u32).to_le_bytes());
    t
}

fn absorb_points(t: &mut Transcript, label: &[u8], curve: &Curve, pts: &[Point]) {
    let mut data = Vec::new();
    for p in pts {
        data.extend_from_slice(&curve.encode_point(p));
    }
    t.absorb(label, &data);
}

fn draw_beta_gamma(t: &mut Transcript, resample: bool) -> (Fe, Fe) {
    if resample {
        (
            t.challenge(b"wiring/beta-resample"),
            t.challenge(b"wiring/gamma-resample"),
        )
    } else {
        (t.challenge(b"wiring/beta"), t.challenge(b"wiring/gamma"))
    }
}

struct Wiring {
    nd: NdTables,
    phi: Vec<Fe>,
    prod: ProductTables,
    beta: Fe,
    gamma: Fe,
    resampled: bool,
}

/// `N, D, phi` with one resample of `(beta, gamma)` on a zero denominator,
/// then the product tables. Charges each stage to `census` if given.
fn wiring(
    f: &Field,
    circuit: &MockCircuit,
    t: &mut Transcript,
    batch: usize,
    mut census: Option<&mut Census>,
) -> Result<Wiring, ProverError> {
    let m = Meter::new();
    let fm = m.field(f);
    for attempt in 0..2 {
        let (beta, gamma) = draw_beta_gamma(t, attempt == 1);
        let nd = construct_nd(
            &fm,
            &WiringInputs {
                w: [&circuit.w[0], &circuit.w[1], &circuit.w[2]],
                sigma: [&circuit.sigma[0], &circuit.sigma[1], &circuit.sigma[2]],
                id: [&circuit.id[0], &circuit.id[1], &circuit.id[2]],
                beta,
                gamma,
            },
        )?;
        if let Some(c) = census.as_deref_mut() {
            m.charge(c, Kernel::NdConstruct);
        }
        let phi = match frac_mle(&fm, &nd.n, &nd.d, batch) {
            Ok(phi) => phi,
            Err(PermError::ZeroDenominator { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        if let Some(c) = census.as_deref_mut() {
            m.charge(c, Kernel::FracMle);
            c.inversions += nd.d.len().div_ceil(batch) as u64;
        }
        let prod = build_product(&fm, &phi)?;
        if let Some(c) = census.as_deref_mut() {
            m.charge(c, Kernel::ProductMle);
        }
        return Ok(Wiring {
            nd,
            phi,
            prod,
            beta,
            gamma,
            resampled: attempt == 1,
        });
    }
    Err(ProverError::ZeroDenominator)
}

/// The six evaluation points given both SumCheck challenge vectors.
pub fn eval_points(f: &Field, r_zc: &[Fe], r_pc: &[Fe]) -> [Vec<Fe>; NUM_EVAL_POINTS] {
    let mu = r_pc.len();
    let with_head = |h: Fe| {
        let mut p = vec![h];
        p.extend_from_slice(&r_pc[..mu - 1]);
        p
    };
    let mut root = vec![f.one(); mu];
    root[0] = f.zero();
    [
        r_zc.to_vec(),
        r_pc.to_vec(),
        with_head(f.zero()),
        with_head(f.one()),
        root,
        vec![f.one(); mu],
    ]
}

/// `prod_j (a_j b_j + (1 - a_j)(1 - b_j))`.
pub fn eq_eval(f: &Field, a: &[Fe], b: &[Fe]) -> Fe {
    a.iter().zip(b).fold(f.one(), |acc, (x, y)| {
        let xy = f.mul(x, y);
        let term = f.add(&f.sub(&f.sub(&f.add(&xy, &xy), x), y), &f.one());
        f.mul(&acc, &term)
    })
}

/// `id_c(x) = c n + sum_j x_j 2^(j-1)`, multilinear in the point.
pub fn id_eval(f: &Field, column: usize, point: &[Fe]) -> Fe {
    let n = 1u64 << point.len();
    let mut acc = f.from_u64(column as u64 * n);
    for (j, x) in point.iter().enumerate() {
        acc = f.add(&acc, &f.mul(&f.from_u64(1 << j), x));
    }
    acc
}

fn poly_table<'a>(circuit: &'a MockCircuit, wiring: &'a Wiring, p: Poly) -> &'a [Fe] {
    match p {
        Poly::Ql => &circuit.ql,
        Poly::Qr => &circuit.qr,
        Poly::Qm => &circuit.qm,
        Poly::Qo => &circuit.qo,
        Poly::Qc => &circuit.qc,
        Poly::W1 => &circuit.w[0],
        Poly::W2 => &circuit.w[1],
        Poly::W3 => &circuit.w[2],
        Poly::S1 => &circuit.sigma[0],
        Poly::S2 => &circuit.sigma[1],
        Poly::S3 => &circuit.sigma[2],
        Poly::Phi => &wiring.phi,
        Poly::Pi => &wiring.prod.pi,
    }
}

fn powers(f: &Field, c: &Fe, n: usize) -> Vec<Fe> {
    let mut out = Vec::with_capacity(n);
    let mut acc = f.one();
    for _ in 0..n {
        out.push(acc);
        acc = f.mul(&acc, c);
    }
    out
}

/// `y_k = sum c^e poly_e` over the evaluations `e` scheduled at point `k`.
fn combine_tables(f: &Field, circuit: &MockCircuit, wiring: &Wiring, coeffs: &[Fe]) -> Vec<Vec<Fe>> {
    let n = circuit.num_gates();
    let mut y = vec![vec![f.zero(); n]; NUM_EVAL_POINTS];
    for (e, &(pt, poly)) in EVAL_SCHEDULE.iter().enumerate() {
        let t = poly_table(circuit, wiring, poly);
        let dst = &mut y[pt.index()];
        for (d, x) in dst.iter_mut().zip(t) {
            *d = f.add(d, &f.mul(&coeffs[e], x));
        }
    }
    y
}

/// `g' = sum_k w_k y_k`.
fn weighted_sum(f: &Field, y: &[Vec<Fe>], w: &[Fe]) -> Vec<Fe> {
    let mut g = vec![f.zero(); y[0].len()];
    for (yk, wk) in y.iter().zip(w) {
        for (d, x) in g.iter_mut().zip(yk) {
            *d = f.add(d, &f.mul(wk, x));
        }
    }
    g
}

/// Quotient table of the lowest variable: `q[i] = t[2i+1] - t[2i]`.
fn quotient(f: &Field, t: &[Fe]) -> Vec<Fe> {
    t.chunks_exact(2).map(|p| f.sub(&p[1], &p[0])).collect()
}

/// Commitments to the quotient tables of `g` as its variables are fixed one
/// at a time to `challenges`: MSMs of `2^(mu-1)`, ..., `1` points. The folds
/// run on `f`, the MSMs on `curve`.
pub fn opening_ladder(
    curve: &Curve,
    f: &Field,
    points: &[Point],
    mut g: Vec<Fe>,
    challenges: &[Fe],
    knobs: &ProverKnobs,
) -> Result<Vec<Point>, ProverError> {
    if g.len() != 1 << challenges.len() || points.len() < g.len() / 2 {
        return Err(ProverError::Shape("opening table"));
    }
    let mut out = Vec::with_capacity(challenges.len());
    for r in challenges {
        let q = quotient(f, &g);
        let cfg = knobs.msm_config(q.len());
        out.push(pippenger(curve, &q, &points[..q.len()], cfg, &mut OpLog::counting())?);
        fix_variable_in_place(f, &mut g, r);
    }
    Ok(out)
}

/// Runs all five steps on `circuit`.
pub fn prove_all(
    curve: &Curve,
    srs: &Srs,
    circuit: &MockCircuit,
    knobs: &ProverKnobs,
) -> Result<ProveOutput, ProverError> {
    let mu = circuit.mu;
    let n = circuit.num_gates();
    let sf = curve.scalar_field().uncounted();
    let points = srs.prefix(n)?;
    let mut census = Census::default();
    let m = Meter::new();
    let fm = m.field(&sf);
    let cm = m.curve(curve);
    let mut t = begin_transcript(&sf, circuit);

    // 1. witness commitments
    let mut witness_commitments = [curve.identity(); 3];
    for (c, w) in circuit.w.iter().enumerate() {
        let tally = SparsityTally::of(&sf, w);
        let cfg = knobs.msm_config(tally.dense.max(1));
        witness_commitments[c] = msm_sparse(&cm, w, points, &tally, cfg, &mut OpLog::counting())?;
        census.witness_tallies.push(tally);
    }
    m.charge(&mut census, Kernel::WitnessMsm);
    absorb_points(&mut t, b"witness/commit", curve, &witness_commitments);

    // 2. gate identity
    let r_eq = t.challenge_vec(b"zerocheck/eq", mu);
    let eq = build_eq(&fm, &r_eq)?.into_entries();
    m.charge(&mut census, Kernel::BuildEq);
    let tables = vec![
        circuit.ql.clone(),
        circuit.qr.clone(),
        circuit.qm.clone(),
        circuit.qo.clone(),
        circuit.qc.clone(),
        circuit.w[0].clone(),
        circuit.w[1].clone(),
        circuit.w[2].clone(),
        eq,
    ];
    let zc_out = sumcheck::prove(&sf, &Composition::zerocheck(), tables, &mut t)?;
    census.add(Kernel::ZeroCheck, zc_out.round_census.iter().sum());
    census.add(Kernel::MleUpdate, zc_out.update_census.iter().sum());

    // 3. wiring identity
    let wr = wiring(&sf, circuit, &mut t, knobs.batch_size, Some(&mut census))?;
    let cfg = knobs.msm_config(n);
    let phi_commitment = pippenger(&cm, &wr.phi, points, cfg, &mut OpLog::counting())?;
    let pi_commitment = pippenger(&cm, &wr.prod.pi, points, cfg, &mut OpLog::counting())?;
    m.charge(&mut census, Kernel::WiringMsm);
    census.wiring_tallies = vec![SparsityTally::of(&sf, &wr.phi), SparsityTally::of(&sf, &wr.prod.pi)];
    absorb_points(&mut t, b"wiring/commit", curve, &[phi_commitment, pi_commitment]);
    let alpha = t.challenge(b"permcheck/alpha");
    let r_eq = t.challenge_vec(b"permcheck/eq", mu);
    let eq = build_eq(&fm, &r_eq)?.into_entries();
    m.charge(&mut census, Kernel::BuildEq);
    let nd = &wr.nd;
    let tables = vec![
        wr.prod.pi.clone(),
        wr.prod.p1.clone(),
        wr.prod.p2.clone(),
        wr.phi.clone(),
        nd.d_parts[0].clone(),
        nd.d_parts[1].clone(),
        nd.d_parts[2].clone(),
        nd.n_parts[0].clone(),
        nd.n_parts[1].clone(),
        nd.n_parts[2].clone(),
        eq,
    ];
    let pc_out = sumcheck::prove(&sf, &Composition::permcheck(alpha), tables, &mut t)?;
    census.add(Kernel::PermCheck, pc_out.round_census.iter().sum());
    census.add(Kernel::MleUpdate, pc_out.update_census.iter().sum());

    // 4. batch evaluation
    let pts = eval_points(&sf, &zc_out.challenges, &pc_out.challenges);
    let mut batch_evals = Vec::with_capacity(EVAL_SCHEDULE.len());
    for &(pt, poly) in &EVAL_SCHEDULE {
        let table = MleTable::new(poly_table(circuit, &wr, poly).to_vec())?;
        batch_evals.push(evaluate(&fm, &table, &pts[pt.index()])?);
    }
    m.charge(&mut census, Kernel::BatchEval);
    t.absorb_fes(b"batch/evals", &sf, &batch_evals);

    // 5. opening
    let c = t.challenge(b"open/combine");
    let coeffs = powers(&fm, &c, EVAL_SCHEDULE.len());
    let y = combine_tables(&fm, circuit, &wr, &coeffs);
    m.charge(&mut census, Kernel::MleCombine);
    let mut tables = y.clone();
    for p in &pts {
        tables.push(build_eq(&fm, p)?.into_entries());
    }
    m.charge(&mut census, Kernel::BuildEq);
    let oc_out = sumcheck::prove(&sf, &Composition::opencheck(NUM_EVAL_POINTS), tables, &mut t)?;
    census.add(Kernel::OpenCheck, oc_out.round_census.iter().sum());
    census.add(Kernel::MleUpdate, oc_out.update_census.iter().sum());

    let g = weighted_sum(&fm, &y, &oc_out.proof.final_evals[NUM_EVAL_POINTS..]);
    m.charge(&mut census, Kernel::MleCombine);
    let fold = Meter::new();
    let opening = opening_ladder(&cm, &fold.field(&sf), points, g, &oc_out.challenges, knobs)?;
    m.charge(&mut census, Kernel::OpenMsm);
    fold.charge(&mut census, Kernel::MleCombine);
    absorb_points(&mut t, b"open/level", curve, &opening);

    Ok(ProveOutput {
        bundle: ProofBundle {
            mu: mu as u32,
            witness_commitments,
            phi_commitment,
            pi_commitment,
            zerocheck: zc_out.proof,
            permcheck: pc_out.proof,
            opencheck: oc_out.proof,
            batch_evals,
            opening,
            beta_resampled: wr.resampled,
            transcript_digest: t.digest(),
        },
        census,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    WitnessCommitments,
    ZeroCheck,
    WiringCommitments,
    PermCheck,
    ProductRoot,
    BatchEvals,
    OpenCheck,
    Opening,
    Transcript,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::WitnessCommitments => "witness_commitments",
            Check::ZeroCheck => "zerocheck",
            Check::WiringCommitments => "wiring_commitments",
            Check::PermCheck => "permcheck",
            Check::ProductRoot => "product_root",
            Check::BatchEvals => "batch_evals",
            Check::OpenCheck => "opencheck",
            Check::Opening => "opening",
            Check::Transcript => "transcript",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub check: Check,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub results: Vec<CheckResult>,
}

impl VerifyReport {
    fn record(&mut self, check: Check, result: Result<(), String>) {
        let (passed, detail) = match result {
            Ok(()) => (true, String::new()),
            Err(d) => (false, d),
        };
        self.results.push(CheckResult { check, passed, detail });
    }

    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn get(&self, check: Check) -> Option<&CheckResult> {
        self.results.iter().find(|r| r.check == check)
    }

    pub fn check_passed(&self, check: Check) -> bool {
        self.get(check).is_some_and(|r| r.passed)
    }

    pub fn failed(&self) -> Vec<Check> {
        self.results.iter().filter(|r| !r.passed).map(|r| r.check).collect()
    }
}

fn same(curve: &Curve, a: &Point, b: &Point, what: &str) -> Result<(), String> {
    if curve.eq_points(a, b) {
        Ok(())
    } else {
        Err(format!("{what} differs from recomputation"))
    }
}

fn sumcheck_result(r: Result<sumcheck::Verified, Rejection>, sum_zero: Option<bool>) -> Result<(), String> {
    r.map_err(|e| format!("{e:?}"))?;
    match sum_zero {
        Some(false) => Err("claimed sum is not zero".into()),
        _ => Ok(()),
    }
}

/// Checks `bundle` against `circuit`. Commitments are recomputed with
/// [`msm_naive`].
///
/// Two transcripts are replayed. The audit transcript absorbs the bundle
/// exactly as sent and must reproduce its digest. The checking transcript
/// absorbs recomputed commitments instead, so a bad commitment is reported
/// by its own check and does not cascade into the SumCheck checks.
pub fn self_verify(
    curve: &Curve,
    srs: &Srs,
    circuit: &MockCircuit,
    bundle: &ProofBundle,
    knobs: &ProverKnobs,
) -> Result<VerifyReport, ProverError> {
    let mu = circuit.mu;
    let n = circuit.num_gates();
    if bundle.mu as usize != mu {
        return Err(ProverError::Shape("mu"));
    }
    if bundle.batch_evals.len() != EVAL_SCHEDULE.len() {
        return Err(ProverError::Shape("evaluation count"));
    }
    if bundle.opening.len() != mu {
        return Err(ProverError::Shape("opening ladder length"));
    }
    let f = curve.scalar_field().uncounted();
    let points = srs.prefix(n)?;
    let mut report = VerifyReport::default();
    let mut audit = begin_transcript(&f, circuit);
    let mut t = begin_transcript(&f, circuit);
    let evals = &bundle.batch_evals;
    let ev = |pt: EvalPoint, poly: Poly| evals[eval_index(pt, poly)];

    // 1. witness commitments
    let mut honest_w = [curve.identity(); 3];
    for (c, w) in circuit.w.iter().enumerate() {
        honest_w[c] = msm_naive(curve, w, points)?;
    }
    report.record(
        Check::WitnessCommitments,
        (0..3).try_for_each(|c| {
            same(
                curve,
                &bundle.witness_commitments[c],
                &honest_w[c],
                &format!("w{}", c + 1),
            )
        }),
    );
    absorb_points(&mut audit, b"witness/commit", curve, &bundle.witness_commitments);
    absorb_points(&mut t, b"witness/commit", curve, &honest_w);

    // 2. gate identity
    audit.challenge_vec(b"zerocheck/eq", mu);
    sumcheck::replay(&f, CompositionKind::ZeroCheck, &bundle.zerocheck, &mut audit);
    let r_eq = t.challenge_vec(b"zerocheck/eq", mu);
    let comp = Composition::zerocheck();
    let oracle = |r: &[Fe]| {
        let mut v: Vec<Fe> = [
            Poly::Ql,
            Poly::Qr,
            Poly::Qm,
            Poly::Qo,
            Poly::Qc,
            Poly::W1,
            Poly::W2,
            Poly::W3,
        ]
        .iter()
        .map(|&p| ev(EvalPoint::ZeroCheck, p))
        .collect();
        v.push(eq_eval(&f, &r_eq, r));
        v
    };
    let res = sumcheck::verify(&f, &comp, &bundle.zerocheck, mu, &mut t.clone(), Some(oracle));
    report.record(
        Check::ZeroCheck,
        sumcheck_result(res, Some(bundle.zerocheck.claimed_sum.is_zero())),
    );
    let r_zc = sumcheck::replay(&f, CompositionKind::ZeroCheck, &bundle.zerocheck, &mut t);

    // 3. wiring identity
    draw_beta_gamma(&mut audit, false);
    if bundle.beta_resampled {
        draw_beta_gamma(&mut audit, true);
    }
    let wr = wiring(&f, circuit, &mut t, knobs.batch_size, None)?;
    let honest_phi = msm_naive(curve, &wr.phi, points)?;
    let honest_pi = msm_naive(curve, &wr.prod.pi, points)?;
    report.record(
        Check::WiringCommitments,
        same(curve, &bundle.phi_commitment, &honest_phi, "phi")
            .and_then(|_| same(curve, &bundle.pi_commitment, &honest_pi, "pi")),
    );
    absorb_points(
        &mut audit,
        b"wiring/commit",
        curve,
        &[bundle.phi_commitment, bundle.pi_commitment],
    );
    absorb_points(&mut t, b"wiring/commit", curve, &[honest_phi, honest_pi]);
    audit.challenge(b"permcheck/alpha");
    audit.challenge_vec(b"permcheck/eq", mu);
    sumcheck::replay(&f, CompositionKind::PermCheck, &bundle.permcheck, &mut audit);
    let alpha = t.challenge(b"permcheck/alpha");
    let r_eq = t.challenge_vec(b"permcheck/eq", mu);
    let (beta, gamma) = (wr.beta, wr.gamma);
    let oracle = |r: &[Fe]| {
        let last = r[mu - 1];
        let split = |lo: Fe, hi: Fe| f.add(&f.mul(&f.sub(&f.one(), &last), &lo), &f.mul(&last, &hi));
        let mut v = vec![f.zero(); pc::COUNT];
        v[pc::PI] = ev(EvalPoint::PermCheck, Poly::Pi);
        v[pc::PHI] = ev(EvalPoint::PermCheck, Poly::Phi);
        v[pc::P1] = split(ev(EvalPoint::PermLow, Poly::Phi), ev(EvalPoint::PermLow, Poly::Pi));
        v[pc::P2] = split(ev(EvalPoint::PermHigh, Poly::Phi), ev(EvalPoint::PermHigh, Poly::Pi));
        let w = [Poly::W1, Poly::W2, Poly::W3];
        let s = [Poly::S1, Poly::S2, Poly::S3];
        for c in 0..3 {
            let wc = ev(EvalPoint::PermCheck, w[c]);
            let part = |idx: Fe| f.add(&f.add(&wc, &f.mul(&beta, &idx)), &gamma);
            v[pc::D1 + c] = part(ev(EvalPoint::PermCheck, s[c]));
            v[pc::N1 + c] = part(id_eval(&f, c, r));
        }
        v[pc::EQ] = eq_eval(&f, &r_eq, r);
        v
    };
    let res = sumcheck::verify(
        &f,
        &Composition::permcheck(alpha),
        &bundle.permcheck,
        mu,
        &mut t.clone(),
        Some(oracle),
    );
    report.record(
        Check::PermCheck,
        sumcheck_result(res, Some(bundle.permcheck.claimed_sum.is_zero())),
    );
    let r_pc = sumcheck::replay(&f, CompositionKind::PermCheck, &bundle.permcheck, &mut t);
    let root = ev(EvalPoint::Root, Poly::Pi);
    let last = ev(EvalPoint::Last, Poly::Pi);
    report.record(
        Check::ProductRoot,
        if root != f.one() {
            Err("product of phi is not one".into())
        } else if !last.is_zero() {
            Err("final product slot is not zero".into())
        } else {
            Ok(())
        },
    );

    // 4. batch evaluation
    let pts = eval_points(&f, &r_zc, &r_pc);
    let mut bad = Vec::new();
    for (e, &(pt, poly)) in EVAL_SCHEDULE.iter().enumerate() {
        let table = MleTable::new(poly_table(circuit, &wr, poly).to_vec())?;
        if evaluate(&f, &table, &pts[pt.index()])? != evals[e] {
            bad.push(format!("{poly:?}@{pt:?}"));
        }
    }
    report.record(
        Check::BatchEvals,
        if bad.is_empty() {
            Ok(())
        } else {
            Err(format!("mismatch: {}", bad.join(", ")))
        },
    );
    audit.absorb_fes(b"batch/evals", &f, evals);
    t.absorb_fes(b"batch/evals", &f, evals);

    // 5. opening
    audit.challenge(b"open/combine");
    sumcheck::replay(&f, CompositionKind::OpenCheck, &bundle.opencheck, &mut audit);
    let c = t.challenge(b"open/combine");
    let coeffs = powers(&f, &c, EVAL_SCHEDULE.len());
    let h = coeffs
        .iter()
        .zip(evals)
        .fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b)));
    let y = combine_tables(&f, circuit, &wr, &coeffs);
    let oracle = |r: &[Fe]| -> Vec<Fe> {
        let mut v: Vec<Fe> = y
            .iter()
            .map(|yk| evaluate(&f, &MleTable::new(yk.clone()).expect("power of two"), r).expect("dimension"))
            .collect();
        v.extend(pts.iter().map(|p| eq_eval(&f, p, r)));
        v
    };
    let comp = Composition::opencheck(NUM_EVAL_POINTS);
    let res = sumcheck::verify(&f, &comp, &bundle.opencheck, mu, &mut t.clone(), Some(oracle));
    report.record(
        Check::OpenCheck,
        res.map_err(|e| format!("{e:?}")).and_then(|_| {
            if bundle.opencheck.claimed_sum == h {
                Ok(())
            } else {
                Err("claimed sum differs from the combined evaluations".into())
            }
        }),
    );
    let r_oc = sumcheck::replay(&f, CompositionKind::OpenCheck, &bundle.opencheck, &mut t);
    let weights: Vec<Fe> = pts.iter().map(|p| eq_eval(&f, p, &r_oc)).collect();
    let mut g = weighted_sum(&f, &y, &weights);
    let mut mismatch = None;
    for (level, r) in r_oc.iter().enumerate() {
        let q = quotient(&f, &g);
        let honest = msm_naive(curve, &q, &points[..q.len()])?;
        if mismatch.is_none() && !curve.eq_points(&honest, &bundle.opening[level]) {
            mismatch = Some(level);
        }
        fix_variable_in_place(&f, &mut g, r);
    }
    absorb_points(&mut audit, b"open/level", curve, &bundle.opening);
    report.record(
        Check::Opening,
        match mismatch {
            None => Ok(()),
            Some(l) => Err(format!("opening level {l} differs from recomputation")),
        },
    );
    report.record(
        Check::Transcript,
        if audit.digest() == bundle.transcript_digest {
            Ok(())
        } else {
            Err("replayed transcript digest differs".into())
        },
    );
    Ok(report)
}
