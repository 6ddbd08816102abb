#![no_main]

use libfuzzer_sys::fuzz_target;
use zkspeed_core::config::{curve_from_toml, field_from_toml, parse_config};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if parse_config(text).is_ok() {
        let _ = field_from_toml(text);
        let _ = curve_from_toml(text);
    }
});
