//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian: max asymmetry {asymmetry:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("matrix is not positive definite: lambda_min = {lambda_min:.6e}")]
    NotPositiveDefinite { lambda_min: f64 },

    #[error("matrix is not positive semidefinite: lambda_min = {lambda_min:.6e}")]
    NotPositiveSemidefinite { lambda_min: f64 },

    #[error("matrix is not a projection: {reason}")]
    NotProjection { reason: String },

    #[error("eigenvalue {eigenvalue:.6e} is outside the domain of the scalar function")]
    ScalarDomain { eigenvalue: f64 },

    #[error("matrix too ill-conditioned: condition number {cond:.3e} exceeds {cap:.3e}")]
    IllConditioned { cond: f64, cap: f64 },

    #[error("projection is zero; a nonzero projection is required")]
    ZeroProjection,

    #[error("invalid tolerance policy: {reason}")]
    InvalidTolerance { reason: String },

    #[error("invalid measure: {reason}")]
    InvalidMeasure { reason: String },

    #[error("invalid representing function: {reason}")]
    InvalidFunction { reason: String },

    #[error("function must be evaluated at x > 0, got {x:.6e}")]
    FunctionDomain { x: f64 },

    #[error("mean descriptor `{label}` carries no measure; the quadrature route needs one")]
    MissingMeasure { label: String },

    #[error("measure-backed evaluation disagrees with the representing function: max relative deviation {deviation:.3e}")]
    MeasureMismatch { deviation: f64 },

    #[error("hypothesis violated: {reason}")]
    Hypothesis { reason: String },

    #[error("the function is affine (no mass on (0,inf)); the h-part is empty")]
    AffineFunction,

    #[error("epsilon ladder must be strictly decreasing and positive")]
    InvalidLadder,

    #[error(
        "ladder iterates are not monotone nonincreasing: step {step} rose by {violation:.3e}; \
         the evaluation is numerically unstable"
    )]
    LadderNotMonotone { step: usize, violation: f64 },

    #[error("independent routes disagree: {first_route} = {first:.6e} vs {second_route} = {second:.6e}")]
    RouteDisagreement {
        first_route: &'static str,
        first: f64,
        second_route: &'static str,
        second: f64,
    },

    #[error("effect element violates 0 <= A <= t*I at level {level}: {reason}")]
    NotEffect { level: f64, reason: String },

    #[error("disjoint pair levels differ: {first} vs {second}")]
    LevelMismatch { first: f64, second: f64 },

    #[error("scale factor must be positive, got {value}")]
    NonPositiveScale { value: f64 },

    #[error("matrix is not unitary: max deviation of U*U from I is {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("custom map queried off its sample set")]
    CustomMapDomain,

    #[error("map specification invalid: {reason}")]
    InvalidMapSpec { reason: String },

    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error("JSON schema error: {reason}")]
    Schema { reason: String },
}
