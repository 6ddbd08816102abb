use std::sync::OnceLock;
use std::time::Instant;

use zkspeed_core::ec::Curve;
use zkspeed_core::mle::SparsityProfile;
use zkspeed_core::prover::{gen_mock_circuit, prove_all, Kernel, ProverKnobs, Srs};
use zkspeed_perf::census::{
    analytical_census, analytical_census_for_profile, compare_census, published_comparison, published_params,
    total_rel_error, CensusInputs, CensusParams,
};

fn curve() -> &'static Curve {
    static C: OnceLock<Curve> = OnceLock::new();
    C.get_or_init(Curve::bls12_381_g1)
}

fn functional(mu: usize, seed: u64) -> zkspeed_core::prover::Census {
    let srs = Srs::generate(curve(), mu, seed).unwrap();
    let c = gen_mock_circuit(curve().scalar_field(), mu, &SparsityProfile::typical(), seed, 0.5).unwrap();
    prove_all(curve(), &srs, &c, &ProverKnobs::default()).unwrap().census
}

#[test]
fn analytical_tracks_instrumented_counts() {
    let f = curve().scalar_field();
    for mu in [8usize, 10, 12] {
        let census = functional(mu, 7 + mu as u64);
        let a = analytical_census(f, mu as u32, &CensusInputs::observed(&census), &CensusParams::default());
        let total = total_rel_error(&a, &census);
        assert!(total <= 0.01, "mu={mu}: total {total}");
        for d in compare_census(&a, &census) {
            assert!(d.rel_error <= 0.01, "mu={mu}: {d:?}");
        }
    }
}

#[test]
fn deterministic_kernels_match_exactly() {
    let f = curve().scalar_field();
    let census = functional(6, 3);
    let a = analytical_census(f, 6, &CensusInputs::observed(&census), &CensusParams::default());
    for k in [
        Kernel::BuildEq,
        Kernel::NdConstruct,
        Kernel::ProductMle,
        Kernel::BatchEval,
        Kernel::ZeroCheck,
        Kernel::PermCheck,
        Kernel::OpenCheck,
        Kernel::MleUpdate,
        Kernel::MleCombine,
        Kernel::FracMle,
    ] {
        assert_eq!(a.modmuls(k), census.modmuls(k) as f64, "{}", k.name());
    }
}

#[test]
fn build_eq_count_is_closed_form() {
    let f = curve().scalar_field();
    for mu in 2..=24u32 {
        let a = analytical_census_for_profile(f, mu, &SparsityProfile::typical(), &CensusParams::default());
        assert_eq!(a.modmuls(Kernel::BuildEq), 8.0 * ((1u64 << (mu + 1)) - 4) as f64);
    }
}

#[test]
fn published_rows_within_tolerance() {
    let t = Instant::now();
    let a = analytical_census_for_profile(
        curve().scalar_field(),
        20,
        &SparsityProfile::typical(),
        &published_params(),
    );
    assert!(t.elapsed().as_secs_f64() < 1.0);
    let rows = published_comparison(&a);
    for name in [
        "open_msm",
        "wiring_msm",
        "zerocheck",
        "permcheck",
        "opencheck",
        "mle_update",
    ] {
        let r = rows
            .iter()
            .find(|r| r.kernel == name)
            .unwrap_or_else(|| panic!("{name}"));
        assert!((0.75..=1.25).contains(&r.ratio), "{r:?}");
    }
}
