#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;
use zkspeed_core::ec::Curve;
use zkspeed_core::prover::ProofBundle;

fn curve() -> &'static Curve {
    static C: OnceLock<Curve> = OnceLock::new();
    C.get_or_init(Curve::bls12_381_g1)
}

fuzz_target!(|data: &[u8]| {
    if let Ok(b) = ProofBundle::decode(curve(), data) {
        assert_eq!(b.encode(curve()), data);
    }
});
