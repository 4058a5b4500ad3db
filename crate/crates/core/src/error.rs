use thiserror::Error;

/// Errors raised by loss construction, divergence evaluation and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("loss `{0}` is not smooth; this operation needs a differentiable entropy")]
    NotSmooth(String),

    #[error("derivative of the entropy of `{loss}` diverges at q = {q}")]
    EndpointDerivative { loss: String, q: f64 },

    #[error("adaptive quadrature did not converge while evaluating at q = {q}")]
    Quadrature { q: f64 },

    #[error("weight function is not integrable near {endpoint}")]
    NonIntegrable { endpoint: f64 },

    #[error("invalid weight function: {0}")]
    InvalidWeight(String),

    #[error("vectors have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("coordinate {index} = {value} is outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },

    #[error("vector does not lie on the simplex (sum = {0})")]
    NotOnSimplex(f64),

    #[error("empty probability vector")]
    Empty,

    #[error("generator `{name}` has a non-finite derivative at coordinate {index} (q = {q})")]
    NonFiniteDerivative { name: String, index: usize, q: f64 },

    #[error("step dp = {0} is too large for the local expansion (limit 1e-2)")]
    StepTooLarge(f64),

    #[error("point p = {p}, p + dp = {q} is outside (0, 1)")]
    OutsideInterior { p: f64, q: f64 },

    #[error("constraint is infeasible: {0}")]
    Infeasible(String),

    #[error("objective is infinite on the whole feasible set")]
    ObjectiveInfinite,

    #[error("epsilon {epsilon} exceeds the attainable maximum {max}")]
    EpsilonTooLarge { epsilon: f64, max: f64 },

    #[error("oracle lattice needs m <= 4, got m = {0}")]
    DimensionTooLarge(usize),

    #[error("fixture file: {0}")]
    Fixture(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
