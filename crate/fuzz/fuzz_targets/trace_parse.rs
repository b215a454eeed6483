#![no_main]

use libfuzzer_sys::fuzz_target;
use mirror_accel::harness::{read_trace, write_trace};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(records) = read_trace(text) {
        let written = write_trace(&records);
        let again = read_trace(&written).expect("written trace parses");
        assert_eq!(written, write_trace(&again));
    }
});
