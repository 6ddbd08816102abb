#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;
use zkspeed_core::fp::Field;
use zkspeed_core::mle::MleTable;

fn field() -> &'static Field {
    static F: OnceLock<Field> = OnceLock::new();
    F.get_or_init(Field::bls12_381_scalar)
}

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = MleTable::decode(field(), data) {
        assert_eq!(t.encode(field()), data);
    }
});
