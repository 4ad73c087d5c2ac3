use thiserror::Error;

/// Errors raised by the numerical kernels, generators and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("constraint set is empty: mass {mass} must lie in (0, {n}]")]
    EmptySet { mass: f64, n: usize },

    #[error("iteration failed to converge: {0}")]
    NoConvergence(String),

    #[error("invalid Laplace scale {0}: inverse diversity must be positive")]
    InvalidScale(f64),

    #[error("matrix is not positive definite")]
    NotPD,

    #[error("matrix is not symmetric (max deviation {0:e})")]
    NotSymmetric(f64),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("inverse diversity w[{i}][{j}] = {value} is not positive")]
    InvalidWeights { i: usize, j: usize, value: f64 },

    #[error("invalid variance {0}: must be positive")]
    InvalidVariance(f64),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("attribute matrix entry ({0}, {1}) = {2} is not 0 or 1")]
    NonBinaryAttributes(usize, usize, f64),

    #[error("attribute matrix has no columns")]
    EmptyData,

    #[error("no tested diagonal offset makes K(c) positive definite at the starting point (last kappa {0})")]
    InfeasibleStart(f64),

    #[error("sample covariance is not positive semidefinite (min eigenvalue {0:e})")]
    NotPSD(f64),

    #[error("sample covariance is singular and the penalty is zero")]
    SingularAtZeroPenalty,

    #[error("linear program is infeasible: {0}")]
    Infeasible(String),

    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
