use thiserror::Error;

/// Errors raised by the geometry, flow and oracle routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A grid or flow configuration is not usable.
    #[error("configuration error: {0}")]
    Config(String),

    /// The surface cannot be written as a radial graph about the origin.
    #[error("not a radial graph: {0}")]
    NotRadialGraph(String),

    /// Non-finite values appeared in a computation.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The mean curvature reached zero or became negative, so the inverse
    /// mean curvature speed is undefined.
    #[error("flow singularity: minimum mean curvature {min_h:e}")]
    FlowSingularity { min_h: f64 },

    /// A quantity that must be non-zero vanished.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A hypothesis required by a check does not hold on the data.
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    /// An iterative procedure hit its iteration cap.
    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// The operation was called with inputs it is not meant for.
    #[error("usage error: {0}")]
    Usage(String),

    /// The requested configuration is outside what the engine implements.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
