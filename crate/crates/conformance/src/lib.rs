//! Independent reference computations for `lot-core` and the acceptance
//! criteria built on them.

use std::sync::OnceLock;

pub mod criteria;
pub mod instances;
pub mod oracles;

pub use criteria::CriterionReport;

/// Versioned experiment configs and fixture measures, by file stem.
pub const CATALOGUE: &[(&str, &str)] = &[
    ("forward-translation", include_str!("../experiments/forward-translation.json")),
    ("forward-quadratic", include_str!("../experiments/forward-quadratic.json")),
    ("forward-dimensional", include_str!("../experiments/forward-dimensional.json")),
    ("converse-flat", include_str!("../experiments/converse-flat.json")),
    ("converse-radii", include_str!("../experiments/converse-radii.json")),
    ("converse-linear", include_str!("../experiments/converse-linear.json")),
    ("fixture-mu", include_str!("../experiments/fixture-mu.json")),
    ("fixture-nu", include_str!("../experiments/fixture-nu.json")),
];

pub fn catalogue_entry(name: &str) -> Option<&'static str> {
    CATALOGUE.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// Sizes the global rayon pool from `LOT_THREADS` once per process.
pub fn init_threads() {
    static INIT: OnceLock<()> = OnceLock::new();
    INIT.get_or_init(|| {
        if let Some(n) = std::env::var("LOT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|n| *n > 0) {
            // a pool built earlier by someone else wins; that is fine
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    });
}

/// Runs all twelve criteria in order.
pub fn run_all() -> Vec<CriterionReport> {
    init_threads();
    criteria::all()
}
