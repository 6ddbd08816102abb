#![no_main]

use libfuzzer_sys::fuzz_target;
use zkspeed_perf::design::parse_design;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(d) = parse_design(text) {
        assert_eq!(parse_design(&d.to_string()).unwrap(), d);
    }
});
