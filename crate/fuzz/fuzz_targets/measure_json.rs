#![no_main]

use libfuzzer_sys::fuzz_target;
use lot_core::io::{measure_to_json, parse_measure};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_measure(text) {
        let again = parse_measure(&measure_to_json(&m).unwrap()).expect("written measures re-parse");
        assert_eq!(again, m);
    }
});
