use thiserror::Error;

/// Errors raised while building problems or running the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("potential is not finite at node {node} (value {value})")]
    NonfinitePotential { node: usize, value: f64 },

    #[error("iterate lost positivity at index {index} (value {value:e})")]
    NonpositiveIterate { index: usize, value: f64 },

    #[error("jacobian is not positive definite (curvature {curvature:e})")]
    IndefiniteJacobian { curvature: f64 },

    #[error("linear solver did not converge in {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("bordered system is degenerate (u^T J^-1 u = {value:e})")]
    DegenerateBorder { value: f64 },

    #[error("line search stalled after {halvings} halvings")]
    LineSearchStall { halvings: usize },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("iteration {iteration}, block {block}: {source}")]
    AtIteration {
        iteration: usize,
        block: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Stable upper-case code used in result tables.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonfinitePotential { .. } => "NONFINITE_POTENTIAL",
            Error::NonpositiveIterate { .. } => "NONPOSITIVE_ITERATE",
            Error::IndefiniteJacobian { .. } => "INDEFINITE_JACOBIAN",
            Error::NoConvergence { .. } => "NO_CONVERGENCE",
            Error::DegenerateBorder { .. } => "DEGENERATE_BORDER",
            Error::LineSearchStall { .. } => "LINE_SEARCH_STALL",
            Error::InvalidSpec(_) => "INVALID_SPEC",
            Error::AtIteration { source, .. } => source.code(),
        }
    }

    /// Strips iteration context, returning the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIteration { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn at(self, iteration: usize, block: usize) -> Error {
        match self {
            e @ Error::AtIteration { .. } => e,
            e => Error::AtIteration {
                iteration,
                block,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
