use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of the operation.
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    /// A quotient whose denominator vanishes at `x`.
    #[error("singularity at x = {x}: {what}")]
    Singularity { what: &'static str, x: f64 },

    /// Quadrature ran out of its subdivision budget.
    #[error("quadrature did not converge: best estimate {best} with error estimate {abs_error_estimate} after {evaluations} evaluations")]
    Accuracy {
        best: f64,
        abs_error_estimate: f64,
        evaluations: usize,
    },

    /// Iterative kernel (series or continued fraction) failed to converge.
    #[error("{what} did not converge at a = {a}, x = {x}")]
    NoConvergence { what: &'static str, a: f64, x: f64 },

    #[error("usage error: {0}")]
    Usage(String),

    /// A custom model whose omega does not match its density.
    #[error("inconsistent custom model: omega differs from d/dx log density by {discrepancy} at x = {worst_x}")]
    ModelConstruction { worst_x: f64, discrepancy: f64 },

    /// Failure while evaluating a function at a specific abscissa.
    #[error("evaluation failed at x = {x}: {source}")]
    Evaluation {
        x: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, x: f64) -> Error {
        match self {
            e @ Error::Evaluation { .. } => e,
            e => Error::Evaluation {
                x,
                source: Box::new(e),
            },
        }
    }
}
