#![allow(dead_code)]

use lot_core::DiscreteMeasure;
use proptest::prelude::*;

/// Distinct atoms with coordinates in the given boxes and random weights.
pub fn measure(len: std::ops::RangeInclusive<usize>, t: (f64, f64), x: (f64, f64)) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec(((t.0..t.1), (x.0..x.1), 0.1f64..1.0), len).prop_filter_map("coincident atoms", |atoms| {
        let points = atoms.iter().map(|a| vec![a.0, a.1]).collect();
        let weights = atoms.iter().map(|a| a.2).collect();
        DiscreteMeasure::normalized(points, weights).ok()
    })
}

/// Source near the origin and target far enough in the future that every
/// pair is timelike.
pub fn timelike_pair() -> impl Strategy<Value = (DiscreteMeasure, DiscreteMeasure)> {
    (measure(1..=4, (0.0, 1.0), (-1.0, 1.0)), measure(1..=4, (3.0, 4.0), (-0.5, 0.5)))
}

pub fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(-2.0), Just(-1.0), Just(-0.5), Just(0.0), Just(0.5), Just(0.9), -3.0f64..0.95]
}
