#![no_main]

use libfuzzer_sys::fuzz_target;
use lot_core::grammar::parse_spacetime;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(st) = parse_spacetime(text) {
        assert!((2..=16).contains(&st.dim()));
        let again = parse_spacetime(&st.label()).expect("labels re-parse");
        assert_eq!(again, st);
        let _ = st.weight().value(&vec![0.0; st.dim()]);
    }
});
