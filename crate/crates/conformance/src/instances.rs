//! Seeded random instances.

use lot_core::DiscreteMeasure;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Between one and `max_atoms` atoms with time in `t` and space in `x`,
/// weights drawn from `[0.1, 1]` and normalised.
pub fn measure(rng: &mut ChaCha8Rng, max_atoms: usize, t: (f64, f64), x: (f64, f64)) -> DiscreteMeasure {
    loop {
        let k = rng.gen_range(1..=max_atoms);
        let points: Vec<Vec<f64>> = (0..k).map(|_| vec![rng.gen_range(t.0..t.1), rng.gen_range(x.0..x.1)]).collect();
        let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
        if let Ok(m) = DiscreteMeasure::normalized(points, weights) {
            return m;
        }
    }
}

/// Source and target with every pair timelike related.
pub fn timelike_pair(rng: &mut ChaCha8Rng, max_atoms: usize) -> (DiscreteMeasure, DiscreteMeasure) {
    (measure(rng, max_atoms, (0.0, 1.0), (-1.0, 1.0)), measure(rng, max_atoms, (3.0, 4.0), (-0.5, 0.5)))
}

/// Source and target that mix timelike, null-free spacelike and forbidden pairs.
pub fn mixed_pair(rng: &mut ChaCha8Rng, max_atoms: usize) -> (DiscreteMeasure, DiscreteMeasure) {
    (measure(rng, max_atoms, (0.0, 1.0), (-1.0, 1.0)), measure(rng, max_atoms, (0.5, 3.0), (-1.0, 1.0)))
}

/// Three measures stacked in time so every leg is causal.
pub fn causal_triple(rng: &mut ChaCha8Rng, max_atoms: usize) -> [DiscreteMeasure; 3] {
    [
        measure(rng, max_atoms, (0.0, 1.0), (-0.5, 0.5)),
        measure(rng, max_atoms, (2.0, 3.0), (-0.5, 0.5)),
        measure(rng, max_atoms, (4.0, 5.0), (-0.5, 0.5)),
    ]
}
