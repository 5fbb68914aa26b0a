use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A point lies on or outside the open domain of a potential or model.
    #[error("point outside domain: {0}")]
    Domain(String),
    /// An iterative solver exhausted its budget.
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("argument out of range: {0}")]
    Range(String),
    #[error("support mismatch: {0}")]
    Support(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("degenerate f-generator: {0}")]
    DegenerateGenerator(String),
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("infeasible constraint: {0}")]
    Infeasible(String),
    #[error("singular metric: {0}")]
    SingularMetric(String),
    #[error("empty cluster persisted after {0} reseeding attempts")]
    EmptyCluster(usize),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Stable error-kind name, used in command-line diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::Convergence(_) => "ConvergenceError",
            Error::Dimension { .. } => "DimensionError",
            Error::Range(_) => "RangeError",
            Error::Support(_) => "SupportError",
            Error::Quadrature(_) => "QuadratureError",
            Error::DegenerateGenerator(_) => "DegenerateGeneratorError",
            Error::Partition(_) => "PartitionError",
            Error::Infeasible(_) => "InfeasibleError",
            Error::SingularMetric(_) => "SingularMetricError",
            Error::EmptyCluster(_) => "EmptyClusterError",
            Error::Degenerate(_) => "DegenerateError",
            Error::Invalid(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
