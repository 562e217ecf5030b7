#![no_main]

use libfuzzer_sys::fuzz_target;
use lot_core::grammar::parse_function;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(u) = parse_function(text) {
        let label = u.label();
        let again = parse_function(&label).expect("labels re-parse");
        assert_eq!(again.label(), label);
        // accepted profiles must be increasing and concave at one
        assert!(!(u.d1(1.0) <= 0.0), "{text}");
        assert!(!(u.d2(1.0) >= 0.0), "{text}");
    }
});
