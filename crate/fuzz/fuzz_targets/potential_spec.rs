#![no_main]

use libfuzzer_sys::fuzz_target;
use lot_core::grammar::parse_potential;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(phi) = parse_potential(text) {
        let again = parse_potential(&phi.label()).expect("labels re-parse");
        assert_eq!(again, phi);
    }
});
