//! Closed-form modmul census of `prove_all`, kernel by kernel.
//!
//! Mirrors the functional prover's counting conventions: one modmul per
//! field multiplication, one per inversion, `padd_modmuls` per point
//! addition or doubling. MSM bucket additions use the exact probability that
//! a window digit of a uniform scalar in `[0, r)` is nonzero.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::Serialize;
use zkspeed_core::ec::PADD_MODMULS;
use zkspeed_core::fp::Field;
use zkspeed_core::mle::SparsityProfile;
use zkspeed_core::msm::{aggregation_ops, PippengerConfig, SparsityTally};
use zkspeed_core::prover::{Census, Kernel};
use zkspeed_core::sumcheck::Composition;

/// Claimed evaluations and evaluation points of the batch-evaluation step.
pub const EVALUATIONS: u64 = 22;
pub const EVAL_POINTS: u64 = 6;
/// Tables the evaluations are drawn from.
pub const EVALUATED_TABLES: u64 = 13;

/// Streamed affine point: two 48-byte coordinates.
pub const POINT_BYTES: f64 = 96.0;

/// Cost of one 381-bit point-field modmul in 255-bit scalar modmuls: the
/// limb-count ratio squared, `(6/4)^2`.
pub const MSM_WEIGHT: f64 = 2.25;

/// Scalar counts of one MSM, possibly fractional (expected values).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalarMix {
    pub zero: f64,
    pub one: f64,
    pub dense: f64,
}

impl From<&SparsityTally> for ScalarMix {
    fn from(t: &SparsityTally) -> Self {
        Self {
            zero: t.zero as f64,
            one: t.one as f64,
            dense: t.dense as f64,
        }
    }
}

impl ScalarMix {
    pub fn expected(n: u64, p: &SparsityProfile) -> Self {
        let n = n as f64;
        Self {
            zero: n * p.zero,
            one: n * p.one,
            dense: n * p.dense,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CensusParams {
    /// Fixed Pippenger window; `None` scales it with the MSM size as the
    /// prover's default does.
    pub window: Option<u32>,
    pub group: usize,
    pub batch: usize,
    pub padd_modmuls: u64,
}

impl Default for CensusParams {
    fn default() -> Self {
        Self {
            window: None,
            group: 16,
            batch: 64,
            padd_modmuls: PADD_MODMULS,
        }
    }
}

impl CensusParams {
    fn msm_config(&self, n: u64) -> PippengerConfig {
        let mut cfg = PippengerConfig::for_size(n.max(1) as usize);
        if let Some(w) = self.window {
            cfg.window = w;
        }
        cfg.group_size = self.group;
        cfg
    }
}

/// `P(window digit != 0)` for each window of width `w`, for `x` uniform in
/// `[0, r)`.
pub fn nonzero_digit_probabilities(r: &BigUint, bits: u32, w: u32) -> Vec<f64> {
    let windows = bits.div_ceil(w);
    let rf = biguint_to_f64(r);
    (0..windows)
        .map(|k| {
            let lo = k * w;
            let span = BigUint::from(1u8) << (lo + w);
            let low = BigUint::from(1u8) << lo;
            let whole = (r / &span) * &low;
            let rem = r % &span;
            let zero = whole + rem.min(low);
            1.0 - biguint_to_f64(&zero) / rf
        })
        .collect()
}

fn biguint_to_f64(x: &BigUint) -> f64 {
    x.to_u64_digits()
        .iter()
        .rev()
        .fold(0.0, |acc, d| acc * 18446744073709551616.0 + *d as f64)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct KernelCount {
    pub modmuls: f64,
    pub padds: f64,
    pub input_bytes: f64,
    pub output_bytes: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticalCensus {
    pub mu: u32,
    pub kernels: BTreeMap<&'static str, KernelCount>,
}

impl AnalyticalCensus {
    pub fn get(&self, k: Kernel) -> KernelCount {
        self.kernels.get(k.name()).copied().unwrap_or_default()
    }

    pub fn modmuls(&self, k: Kernel) -> f64 {
        self.get(k).modmuls
    }

    fn set(&mut self, k: Kernel, c: KernelCount) {
        self.kernels.insert(k.name(), c);
    }
}

/// Expected point operations of one Pippenger over `mix`: dense scalars
/// uniform in `[0, r)`, 1-scalars hitting one bucket, zeros skipped.
pub fn expected_pippenger_padds(f: &Field, mix: &ScalarMix, cfg: PippengerConfig) -> f64 {
    let w = cfg.window;
    let probs = nonzero_digit_probabilities(f.modulus(), f.bit_width(), w);
    let windows = probs.len() as f64;
    let buckets: f64 = mix.dense * probs.iter().sum::<f64>() + mix.one;
    let agg = aggregation_ops((1usize << w) - 1, cfg.group_size) as f64;
    buckets + windows * (agg + 1.0) + (windows - 1.0) * w as f64
}

/// Expected point operations of a sparse MSM: ones tree, dense Pippenger,
/// join.
pub fn expected_sparse_padds(f: &Field, mix: &ScalarMix, p: &CensusParams) -> f64 {
    let tree = (mix.one - 1.0).max(0.0);
    let dense = if mix.dense > 0.0 {
        let only = ScalarMix {
            zero: 0.0,
            one: 0.0,
            dense: mix.dense,
        };
        expected_pippenger_padds(f, &only, p.msm_config(mix.dense.round() as u64))
    } else {
        0.0
    };
    let join = if mix.one > 0.0 && mix.dense > 0.0 { 1.0 } else { 0.0 };
    tree + dense + join
}

/// Scalar mixes of the committed tables.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusInputs {
    /// One per witness column.
    pub witness: Vec<ScalarMix>,
    /// `phi` then `pi`.
    pub wiring: Vec<ScalarMix>,
}

impl CensusInputs {
    /// Expected mixes: witness columns at the profile, wiring tables dense.
    pub fn expected(mu: u32, profile: &SparsityProfile) -> Self {
        let n = 1u64 << mu;
        Self {
            witness: vec![ScalarMix::expected(n, profile); 3],
            wiring: vec![ScalarMix::expected(n, &SparsityProfile::dense_only()); 2],
        }
    }

    /// The mixes an instrumented run observed.
    pub fn observed(c: &Census) -> Self {
        Self {
            witness: c.witness_tallies.iter().map(ScalarMix::from).collect(),
            wiring: c.wiring_tallies.iter().map(ScalarMix::from).collect(),
        }
    }
}

/// Per-kernel census of one proof at `2^mu` gates over scalar field `f`.
pub fn analytical_census(f: &Field, mu: u32, inputs: &CensusInputs, p: &CensusParams) -> AnalyticalCensus {
    let witness = &inputs.witness;
    let n = (1u64 << mu) as f64;
    let nn = 1u64 << mu;
    let fe = f.byte_len() as f64;
    let pt = POINT_BYTES;
    let padd = p.padd_modmuls as f64;
    let mut out = AnalyticalCensus {
        mu,
        kernels: BTreeMap::new(),
    };
    let msm = |padds: f64, input: f64, commits: f64| KernelCount {
        modmuls: padd * padds,
        padds,
        input_bytes: input,
        output_bytes: commits * pt,
    };

    let w_padds: f64 = witness.iter().map(|m| expected_sparse_padds(f, m, p)).sum();
    let w_in: f64 = witness.iter().map(|m| (m.one + m.dense) * pt + n * fe).sum();
    out.set(Kernel::WitnessMsm, msm(w_padds, w_in, witness.len() as f64));

    let wire: f64 = inputs
        .wiring
        .iter()
        .map(|m| expected_pippenger_padds(f, m, p.msm_config(nn)))
        .sum();
    let tables = inputs.wiring.len() as f64;
    out.set(Kernel::WiringMsm, msm(wire, tables * n * (pt + fe), tables));

    let mut ladder = 0.0;
    let mut ladder_in = 0.0;
    for k in (0..mu).rev() {
        let m = (1u64 << k) as f64;
        let mix = ScalarMix {
            zero: 0.0,
            one: 0.0,
            dense: m,
        };
        ladder += expected_pippenger_padds(f, &mix, p.msm_config(1 << k));
        ladder_in += m * (pt + fe);
    }
    out.set(Kernel::OpenMsm, msm(ladder, ladder_in, mu as f64));

    let one = f.one();
    let comps: [(Kernel, Composition); 3] = [
        (Kernel::ZeroCheck, Composition::zerocheck()),
        (Kernel::PermCheck, Composition::permcheck(one)),
        (Kernel::OpenCheck, Composition::opencheck(EVAL_POINTS as usize)),
    ];
    let mut update = KernelCount::default();
    for (k, c) in &comps {
        let ops = c.num_operands() as f64;
        out.set(
            *k,
            KernelCount {
                modmuls: c.round_modmuls(mu as usize) as f64,
                padds: 0.0,
                input_bytes: ops * n * fe,
                output_bytes: 0.0,
            },
        );
        // Every round reads both halves and writes one half of each table.
        let entries = 2.0 * (n - 1.0);
        update.modmuls += c.update_modmuls(mu as usize) as f64;
        update.input_bytes += ops * entries * fe;
        update.output_bytes += ops * entries / 2.0 * fe;
    }
    out.set(Kernel::MleUpdate, update);

    let eq_tables = 2.0 + EVAL_POINTS as f64;
    out.set(
        Kernel::BuildEq,
        KernelCount {
            modmuls: eq_tables * (2.0 * n - 4.0),
            output_bytes: eq_tables * n * fe,
            ..Default::default()
        },
    );
    out.set(
        Kernel::NdConstruct,
        KernelCount {
            modmuls: 10.0 * n,
            input_bytes: 6.0 * n * fe,
            output_bytes: 6.0 * n * fe,
            ..Default::default()
        },
    );
    let b = p.batch.max(1) as u64;
    let full = nn / b;
    let rest = nn % b;
    let batch_cost = |len: u64| if len == 0 { 0 } else { 3 * (len - 1) + 1 };
    let frac = full * batch_cost(b) + batch_cost(rest) + nn;
    out.set(
        Kernel::FracMle,
        KernelCount {
            modmuls: frac as f64,
            input_bytes: 2.0 * n * fe,
            output_bytes: n * fe,
            ..Default::default()
        },
    );
    out.set(
        Kernel::ProductMle,
        KernelCount {
            modmuls: n - 1.0,
            input_bytes: n * fe,
            output_bytes: n * fe,
            ..Default::default()
        },
    );
    out.set(
        Kernel::BatchEval,
        KernelCount {
            modmuls: EVALUATIONS as f64 * (n - 1.0),
            input_bytes: EVALUATED_TABLES as f64 * n * fe,
            ..Default::default()
        },
    );
    out.set(
        Kernel::MleCombine,
        KernelCount {
            modmuls: EVALUATIONS as f64 + EVALUATIONS as f64 * n + EVAL_POINTS as f64 * n + (n - 1.0),
            input_bytes: EVALUATED_TABLES as f64 * n * fe,
            output_bytes: EVAL_POINTS as f64 * n * fe,
            ..Default::default()
        },
    );
    out
}

/// Census with each witness column at the profile's expected mix.
pub fn analytical_census_for_profile(
    f: &Field,
    mu: u32,
    profile: &SparsityProfile,
    p: &CensusParams,
) -> AnalyticalCensus {
    analytical_census(f, mu, &CensusInputs::expected(mu, profile), p)
}

/// One row of the published-count comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PublishedRow {
    pub kernel: &'static str,
    pub model_millions: f64,
    pub reference_millions: f64,
    pub ratio: f64,
}

/// Published modmul counts (millions) at `2^20` gates, by kernel.
pub const PUBLISHED_MODMULS: [(Kernel, f64); 12] = [
    (Kernel::OpenMsm, 1160.0),
    (Kernel::WiringMsm, 2290.0),
    (Kernel::WitnessMsm, 1370.0),
    (Kernel::BatchEval, 23.1),
    (Kernel::ZeroCheck, 77.6),
    (Kernel::FracMle, 5.19),
    (Kernel::PermCheck, 94.4),
    (Kernel::MleCombine, 18.9),
    (Kernel::OpenCheck, 31.5),
    (Kernel::NdConstruct, 10.5),
    (Kernel::ProductMle, 1.05),
    (Kernel::MleUpdate, 33.6),
];

/// Model counts against the published ones, MSM rows in 255-bit-equivalent
/// modmuls.
pub fn published_comparison(c: &AnalyticalCensus) -> Vec<PublishedRow> {
    PUBLISHED_MODMULS
        .iter()
        .map(|&(k, reference)| {
            let w = if k.is_msm() { MSM_WEIGHT } else { 1.0 };
            let model = c.modmuls(k) * w / 1e6;
            PublishedRow {
                kernel: k.name(),
                model_millions: model,
                reference_millions: reference,
                ratio: model / reference,
            }
        })
        .collect()
}

/// Parameters the published-count comparison runs at: the reference design's
/// window for every MSM.
pub fn published_params() -> CensusParams {
    CensusParams {
        window: Some(9),
        ..CensusParams::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusDiff {
    pub kernel: &'static str,
    pub analytical: f64,
    pub instrumented: u64,
    pub rel_error: f64,
}

/// Kernel-by-kernel relative error of the analytical census against an
/// instrumented run.
pub fn compare_census(a: &AnalyticalCensus, c: &Census) -> Vec<CensusDiff> {
    Kernel::ALL
        .iter()
        .map(|&k| {
            let x = a.modmuls(k);
            let y = c.modmuls(k);
            let rel = if y == 0 {
                if x == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (x - y as f64).abs() / y as f64
            };
            CensusDiff {
                kernel: k.name(),
                analytical: x,
                instrumented: y,
                rel_error: rel,
            }
        })
        .collect()
}

/// Total relative error over all kernels.
pub fn total_rel_error(a: &AnalyticalCensus, c: &Census) -> f64 {
    let x: f64 = Kernel::ALL.iter().map(|&k| a.modmuls(k)).sum();
    let y: u64 = Kernel::ALL.iter().map(|&k| c.modmuls(k)).sum();
    (x - y as f64).abs() / y as f64
}
