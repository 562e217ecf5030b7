#![no_main]

use libfuzzer_sys::fuzz_target;
use lot_core::grammar::parse_density;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rho) = parse_density(text) {
        assert!(rho.volume() > 0.0);
        let again = parse_density(&rho.label()).expect("labels re-parse");
        assert_eq!(again, rho);
    }
});
