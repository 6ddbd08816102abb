#![no_main]

use libfuzzer_sys::fuzz_target;
use zkspeed_perf::costs::parse_cost_tables;
use zkspeed_perf::design::DesignPoint;
use zkspeed_perf::rollup::area_power_rollup;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = parse_cost_tables(text) {
        let _ = area_power_rollup(&DesignPoint::REFERENCE, &c);
    }
});
