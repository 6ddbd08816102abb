#![no_main]

use libfuzzer_sys::fuzz_target;
use zkspeed_perf::design::KnobDomains;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(d) = KnobDomains::from_toml(text) {
        let n = d.cardinality();
        assert!(n >= 1 && n <= KnobDomains::full_space().cardinality());
        assert!(d.nth(n - 1).validate().is_ok());
    }
});
