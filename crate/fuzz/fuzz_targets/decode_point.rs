#![no_main]

use libfuzzer_sys::fuzz_target;
use zkspeed_core::ec::Curve;

fuzz_target!(|data: &[u8]| {
    let c = Curve::toy17();
    if let Ok(p) = c.decode_point(data) {
        assert!(c.eq_points(&c.decode_point(&c.encode_point(&p)).unwrap(), &p));
    }
});
