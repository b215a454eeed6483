#![no_main]

use libfuzzer_sys::fuzz_target;
use mirror_accel::harness::{ExperimentConfig, Settings};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(settings) = Settings::parse(text) {
        // Resolution may reject the values but must not panic.
        let _ = ExperimentConfig::resolve(&settings);
    }
});
