//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Domain parameters violate a constructor precondition.
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    /// A point required to be interior (with the stated margin) is not.
    #[error("point {point:?} is not interior to the domain (margin {margin})")]
    NotInterior { point: (f64, f64), margin: f64 },

    /// Operation needs a bounded domain but received a sector or half-plane.
    #[error("operation requires a bounded domain: {0}")]
    UnboundedDomain(&'static str),

    /// Operation is only defined for sectors or half-planes.
    #[error("operation requires a sector: {0}")]
    NotASector(&'static str),

    /// Support direction outside the admissible cone of an unbounded domain.
    #[error("support direction {angle} is not admissible for this domain")]
    DirectionNotAdmissible { angle: f64 },

    /// A quadrature or series failed to meet its accuracy target.
    #[error("accuracy target not met in {context}: estimated error {estimate:e} > {tolerance:e}")]
    AccuracyNotMet {
        context: String,
        estimate: f64,
        tolerance: f64,
    },

    /// A rational function has a pole inside or too close to the domain.
    #[error("pole at ({0}, {1}) lies inside the forbidden region")]
    PoleInsideDomain(f64, f64),

    /// Denominator polynomial is identically zero or empty.
    #[error("invalid rational function: {0}")]
    InvalidRational(String),

    /// Linear solve rejected because of an excessive condition estimate.
    #[error("denominator matrix is ill conditioned: cond ≈ {cond:e} exceeds {limit:e}")]
    IllConditioned { cond: f64, limit: f64 },

    /// Resolvent or linear system is numerically singular.
    #[error("singular linear system in {0}")]
    SingularSystem(&'static str),

    /// The numerical range of the operator escapes the domain.
    #[error("numerical range not contained in the domain: {0}")]
    RangeNotContained(&'static str),

    /// Iterative eigensolver did not converge.
    #[error("eigensolver failed to converge for a {n}×{n} matrix")]
    EigenConvergence { n: usize },

    /// A pointwise kernel estimate that should hold analytically was violated.
    #[error("kernel estimate violated at sample {index}: |value| {value} > bound {bound}")]
    EstimateViolated {
        index: usize,
        value: f64,
        bound: f64,
    },

    /// Matrix input has the wrong shape.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Configuration rejected before any computation ran.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An empty family or trial list where at least one element is required.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
