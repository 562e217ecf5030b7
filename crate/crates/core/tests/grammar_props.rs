use lot_core::grammar::{parse_density, parse_function, parse_potential, parse_spacetime};
use lot_core::io::{measure_to_json, parse_measure};
use proptest::prelude::*;

mod common;

fn function_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![(-3.0f64..0.99).prop_filter("zero", |p| *p != 0.0).prop_map(|p| format!("u_p:{p}")), Just("u_0".to_string()),];
    leaf.prop_recursive(4, 16, 1, |inner| {
        prop_oneof![
            inner.clone().prop_map(|u| format!("conjugate({u})")),
            (inner.clone(), 0.1f64..10.0).prop_map(|(u, l)| format!("rescale({u},{l})")),
            (inner, -5.0f64..5.0).prop_map(|(u, c)| format!("shift({u},{c})")),
        ]
    })
}

proptest! {
    #[test]
    fn function_labels_round_trip(text in function_text()) {
        let u = parse_function(&text).unwrap();
        prop_assert_eq!(u.label(), text);
    }

    #[test]
    fn parsers_never_panic(text in ".{0,64}") {
        let _ = parse_function(&text);
        let _ = parse_spacetime(&text);
        let _ = parse_potential(&text);
        let _ = parse_density(&text);
        let _ = parse_measure(&text);
    }

    #[test]
    fn measures_round_trip(m in common::measure(1..=6, (-1e6, 1e6), (-1e-6, 1e-6))) {
        prop_assert_eq!(parse_measure(&measure_to_json(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn spacetime_labels_round_trip(dim in 2usize..5, alpha in -2.0f64..2.0, n in prop_oneof![Just(f64::INFINITY), 6.0f64..20.0]) {
        let text = format!("minkowski:{dim} V=quad:alpha={alpha} N={}", if n.is_infinite() { "inf".to_string() } else { n.to_string() });
        let st = parse_spacetime(&text).unwrap();
        prop_assert_eq!(st.label(), text);
    }
}
