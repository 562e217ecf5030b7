use lot_core::duality::{cyclical_monotonicity_margin, dual_value, find_u_separation, verify_certificate};
use lot_core::transport::{ell_u, DEFAULT_TOLERANCE};
use lot_core::{AdmissibleFunction, Spacetime};
use proptest::prelude::*;

mod common;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn strong_duality((mu, nu) in common::timelike_pair(), p in prop_oneof![Just(-1.0), Just(0.0), Just(0.5)]) {
        let st = Spacetime::minkowski(2).unwrap();
        let u = AdmissibleFunction::builtin(p).unwrap();
        let primal = ell_u(&st, &mu, &nu, &u, DEFAULT_TOLERANCE).unwrap().lambda_value();
        let dual = dual_value(&st, &mu, &nu, &u, DEFAULT_TOLERANCE).unwrap().to_f64();
        prop_assert!((primal - dual).abs() <= 2e-8 * primal.max(1.0), "{primal} vs {dual}");
    }

    #[test]
    fn certificates_validate((mu, nu) in common::timelike_pair(), p in prop_oneof![Just(-1.0), Just(0.0), Just(0.5)]) {
        let st = Spacetime::minkowski(2).unwrap();
        let u = AdmissibleFunction::builtin(p).unwrap();
        let cert = find_u_separation(&st, &mu, &nu, &u, DEFAULT_TOLERANCE).unwrap();
        let rep = verify_certificate(&cert, &st, &mu, &nu, &u).unwrap();
        prop_assert!(rep.valid, "{rep:?}");
        let mono = cyclical_monotonicity_margin(&cert.cost, &cert.coupling, 4).unwrap();
        prop_assert!(mono.min_margin >= -1e-8);
    }
}
