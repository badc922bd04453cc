use thiserror::Error;

/// Errors raised by domain construction, assembly, solvers and bound evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("grid resolution {got} is below the minimum of {min}")]
    ResolutionTooCoarse { got: usize, min: usize },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("ellipticity violated at node {node}: {detail}")]
    Ellipticity { node: usize, detail: String },

    #[error("coefficient bound b0 exceeded at node {node}: {detail}")]
    CoefficientBound { node: usize, detail: String },

    #[error("mixed derivatives break diagonal dominance at node {node} (axis {axis})")]
    MonotonicityLoss { node: usize, axis: usize },

    #[error("non-radial data on a ball domain: {0}")]
    NonRadial(String),

    #[error("singular or ill-conditioned operator (pivot {pivot:e} at row {row})")]
    Singular { row: usize, pivot: f64 },

    #[error("linear solve residual {residual:e} above tolerance {tol:e}")]
    LinearSolve { residual: f64, tol: f64 },

    #[error("no convergence after {iterations} iterations (last change {change:e})")]
    NoConvergence { iterations: usize, change: f64 },

    #[error("non-positive principal eigenvalue {0:e}; the operator fails the weak maximum principle")]
    NonPositiveEigenvalue(f64),

    #[error("component {component} collapsed or blew up (norm {norm:e})")]
    Degenerate { component: usize, norm: f64 },

    #[error("component {component} took negative value {value:e} at node {node}")]
    NegativeComponent { component: usize, node: usize, value: f64 },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("dimension mismatch: {0}")]
    Mismatch(String),

    #[error("expression error at column {column}: {message}")]
    Expression { column: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable identifier used by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidDomain(_) => "invalid_domain",
            Error::ResolutionTooCoarse { .. } => "resolution_too_coarse",
            Error::UnsupportedDimension(_) => "unsupported_dimension",
            Error::Ellipticity { .. } => "ellipticity",
            Error::CoefficientBound { .. } => "coefficient_bound",
            Error::MonotonicityLoss { .. } => "monotonicity_loss",
            Error::NonRadial(_) => "non_radial",
            Error::Singular { .. } => "singular",
            Error::LinearSolve { .. } => "linear_solve",
            Error::NoConvergence { .. } => "no_convergence",
            Error::NonPositiveEigenvalue(_) => "non_positive_eigenvalue",
            Error::Degenerate { .. } => "degenerate",
            Error::NegativeComponent { .. } => "negative_component",
            Error::InvalidSystem(_) => "invalid_system",
            Error::Hypothesis(_) => "hypothesis",
            Error::Mismatch(_) => "mismatch",
            Error::Expression { .. } => "expression",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }

    /// Process exit status for the CLI.
    pub fn exit_status(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Expression { .. } => 2,
            Error::Io(_) => 3,
            Error::Hypothesis(_) => 4,
            _ => 5,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
