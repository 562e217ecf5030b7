use lot_core::measure::DiscreteMeasure;
use lot_core::transport::{ell_p_closed_form, ell_u, glue, triangle_defect, DEFAULT_TOLERANCE};
use lot_core::{AdmissibleFunction, ExtendedReal, Spacetime};
use proptest::prelude::*;

mod common;

fn map_points(m: &DiscreteMeasure, f: impl Fn(&[f64]) -> Vec<f64>) -> DiscreteMeasure {
    DiscreteMeasure::new(m.points().iter().map(|p| f(p)).collect(), m.weights().to_vec()).unwrap()
}

fn close(a: ExtendedReal, b: ExtendedReal, tol: f64) -> bool {
    match (a, b) {
        (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => (a - b).abs() <= tol * a.abs().max(1.0),
        (a, b) => a == b,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn couplings_keep_their_marginals(mu in common::measure(1..=5, (0.0, 1.0), (-1.0, 1.0)), nu in common::measure(1..=5, (0.5, 3.0), (-1.0, 1.0))) {
        let st = Spacetime::minkowski(2).unwrap();
        let sol = ell_u(&st, &mu, &nu, &AdmissibleFunction::power(0.5).unwrap(), DEFAULT_TOLERANCE).unwrap();
        if let Some(pi) = sol.coupling {
            prop_assert!(pi.marginal_error(&mu, &nu) <= 1e-10);
        } else {
            prop_assert!(sol.lambda.is_neg_inf());
        }
    }

    #[test]
    fn matches_the_power_closed_form((mu, nu) in common::timelike_pair(), p in prop_oneof![Just(-1.0), Just(0.0), Just(0.5), -2.0f64..0.9]) {
        let st = Spacetime::minkowski(2).unwrap();
        let u = AdmissibleFunction::builtin(p).unwrap();
        let a = ell_u(&st, &mu, &nu, &u, DEFAULT_TOLERANCE).unwrap().lambda;
        let b = ell_p_closed_form(&st, &mu, &nu, p).unwrap();
        prop_assert!(close(a, b, 1e-6), "{a} vs {b}");
    }

    #[test]
    fn scales_with_the_spacetime((mu, nu) in common::timelike_pair(), c in 0.2f64..5.0) {
        let st = Spacetime::minkowski(2).unwrap();
        let u = AdmissibleFunction::power(-1.0).unwrap();
        let a = ell_u(&st, &mu, &nu, &u, 1e-10).unwrap().lambda_value();
        let scale = |p: &[f64]| p.iter().map(|x| c * x).collect();
        let b = ell_u(&st, &map_points(&mu, scale), &map_points(&nu, scale), &u, 1e-10).unwrap().lambda_value();
        prop_assert!((b - c * a).abs() <= 1e-7 * (c * a).max(1.0));
    }

    #[test]
    fn boost_and_translation_invariant((mu, nu) in common::timelike_pair(), rapidity in -1.0f64..1.0, shift in -2.0f64..2.0) {
        let st = Spacetime::minkowski(2).unwrap();
        let u = AdmissibleFunction::log();
        let (ch, sh) = (rapidity.cosh(), rapidity.sinh());
        let boost = |p: &[f64]| vec![ch * p[0] + sh * p[1] + shift, sh * p[0] + ch * p[1] - shift];
        let a = ell_u(&st, &mu, &nu, &u, 1e-10).unwrap().lambda_value();
        let b = ell_u(&st, &map_points(&mu, boost), &map_points(&nu, boost), &u, 1e-10).unwrap().lambda_value();
        prop_assert!((a - b).abs() <= 1e-7 * a.max(1.0));
    }

    #[test]
    fn reverse_triangle(m1 in common::measure(1..=3, (0.0, 1.0), (-0.5, 0.5)), m2 in common::measure(1..=3, (2.0, 3.0), (-0.5, 0.5)), m3 in common::measure(1..=3, (4.0, 5.0), (-0.5, 0.5)), p in prop_oneof![Just(0.0), Just(0.5), Just(-1.0)]) {
        let st = Spacetime::minkowski(2).unwrap();
        let d = triangle_defect(&st, &m1, &m2, &m3, &AdmissibleFunction::builtin(p).unwrap(), DEFAULT_TOLERANCE).unwrap();
        prop_assert!(d.to_f64() >= -1e-6, "{d}");
    }

    #[test]
    fn gluing_keeps_outer_marginals(m1 in common::measure(1..=3, (0.0, 1.0), (-0.5, 0.5)), m2 in common::measure(1..=3, (2.0, 3.0), (-0.5, 0.5)), m3 in common::measure(1..=3, (4.0, 5.0), (-0.5, 0.5))) {
        let st = Spacetime::minkowski(2).unwrap();
        let u = AdmissibleFunction::power(0.5).unwrap();
        let a = ell_u(&st, &m1, &m2, &u, DEFAULT_TOLERANCE).unwrap().coupling.unwrap();
        let b = ell_u(&st, &m2, &m3, &u, DEFAULT_TOLERANCE).unwrap().coupling.unwrap();
        let c = glue(&a, &b, &m2).unwrap();
        prop_assert!(c.marginal_error(&m1, &m3) <= 1e-10);
    }
}
