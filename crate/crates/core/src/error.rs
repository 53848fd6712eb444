use thiserror::Error;

use crate::validation::ValidationReport;

#[derive(Debug, Error)]
pub enum QuiverError {
    #[error("invalid input: {0}")]
    Invalid(ValidationReport),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("gauge matrix at {0} is not invertible")]
    NotInvertible(String),
    #[error("trace obstruction: sum of tau_i * n_i = {0}, expected 0")]
    TraceObstruction(f64),
    #[error("representation is not structured (residual {0:.3e})")]
    NotStructured(f64),
    #[error("summand {index} violates its kind symmetry (residual {residual:.3e})")]
    KindSymmetryViolated { index: usize, residual: f64 },
    #[error("fixed vertex {vertex} carries an antisymmetric form but has odd dimension {dim}")]
    OddSymplecticDimension { vertex: String, dim: usize },
    #[error("L-type block needs even size, got {0}")]
    OddBlockSize(usize),
    #[error("gauge element is not in the structured group (residual {0:.3e})")]
    NotInStructuredGroup(f64),
    #[error("one-parameter subgroup is not in the structured Lie algebra (residual {0:.3e})")]
    NotInStructuredAlgebra(f64),
    #[error("non-semisimple endomorphism algebra: {0}")]
    NonSemisimple(String),
    #[error("form degenerate on polystable decomposition: {0}")]
    DegenerateForm(String),
}

pub type Result<T> = std::result::Result<T, QuiverError>;
