//! Orlicz-type optimal transport between finitely supported measures on
//! Minkowski space, together with the continuous machinery (transport maps,
//! Jacobians, relative entropy) used to probe weighted timelike Ricci bounds.

// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admissible;
pub mod duality;
pub mod entropy;
pub mod error;
pub mod experiment;
pub mod extended;
pub mod geodesic;
pub mod grammar;
pub mod io;
pub mod lp;
pub mod measure;
pub mod sampling;
pub mod spacetime;
pub mod transport;

pub use admissible::AdmissibleFunction;
pub use error::{LotError, Result};
pub use extended::ExtendedReal;
pub use measure::{Coupling, DiscreteMeasure};
pub use spacetime::Spacetime;
