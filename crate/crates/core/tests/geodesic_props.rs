use lot_core::geodesic::{geodesic_path, geodesy_defect, non_crossing_check};
use lot_core::transport::DEFAULT_TOLERANCE;
use lot_core::{AdmissibleFunction, Spacetime};
use proptest::prelude::*;

mod common;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn interpolants_are_geodesics((mu, nu) in common::timelike_pair(), p in prop_oneof![Just(0.0), Just(0.5)]) {
        let st = Spacetime::minkowski(2).unwrap();
        let u = AdmissibleFunction::builtin(p).unwrap();
        let path = geodesic_path(&st, &mu, &nu, &u, 5, 1e-10).unwrap();
        prop_assert_eq!(&path.measures[0], &mu);
        prop_assert_eq!(&path.measures[4], &nu);
        let defect = geodesy_defect(&st, &path, &u, 1e-10).unwrap();
        prop_assert!(defect <= 2e-5, "{defect}");
    }

    #[test]
    fn optimal_supports_do_not_cross((mu, nu) in common::timelike_pair(), s in 0.05f64..0.95) {
        let st = Spacetime::minkowski(2).unwrap();
        let u = AdmissibleFunction::power(0.5).unwrap();
        let path = geodesic_path(&st, &mu, &nu, &u, 2, DEFAULT_TOLERANCE).unwrap();
        let pairs: Vec<_> = path.coupling.support(1e-12).iter().map(|&(i, j, _)| (mu.point(i).to_vec(), nu.point(j).to_vec())).collect();
        let rep = non_crossing_check(&st, &pairs, &u.rescale(path.lambda).unwrap(), s).unwrap();
        prop_assert!(rep.ok);
    }
}
