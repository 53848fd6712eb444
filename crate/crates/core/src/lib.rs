//! Finite-dimensional representations of plain, symmetric, supermixed and
//! generalized quivers: moment maps, the gauge equation and its gradient-flow
//! solver, one-parameter-subgroup weights, destabilizer search and
//! polystable decomposition.

pub mod decompose;
pub mod error;
pub mod flow;
pub mod generalized;
pub mod linalg;
pub mod mixed;
pub mod moment;
pub mod quiver;
pub mod search;
pub mod symmetric;
pub mod validation;
pub mod weights;

pub use error::{QuiverError, Result};
pub use validation::ValidationReport;
