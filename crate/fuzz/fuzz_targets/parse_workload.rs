#![no_main]

use libfuzzer_sys::fuzz_target;
use zkspeed_core::prover::Workload;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(w) = Workload::from_json(text) {
        assert_eq!(Workload::from_json(&w.to_json()).unwrap(), w);
    }
});
