//! Error type shared by the whole laboratory.

/// Errors produced by field evaluation, rearrangement, quadrature and the
/// diagnostic scans.
#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// Evaluation point outside the field's domain of definition.
    #[error("point with |x| = {radius:.6e} outside domain {reason}")]
    Domain { radius: f64, reason: String },
    /// A derivative order above what the field can produce was requested.
    #[error("derivative order {requested} not available (max {max})")]
    Order { requested: usize, max: usize },
    /// Fundamental-solution branch not covered (logarithmic kernels).
    #[error("unsupported dimension n = {n} for operator order {operator_order}")]
    UnsupportedDimension { n: usize, operator_order: usize },
    /// The field handed to a system verifier does not match the system family.
    #[error("field family {field} does not match system {system}")]
    FamilyMismatch { field: String, system: String },
    /// Rearrangement of an empty sample set.
    #[error("empty sample set")]
    EmptyInput,
    /// Lorentz index out of range.
    #[error("primary index p = {p} must satisfy p > 1")]
    Index { p: f64 },
    /// Adaptive quadrature exhausted its panel budget without a verdict.
    #[error("tolerance {tol:.3e} not met after {panels} panels (tail estimate {tail:.3e})")]
    ToleranceNotMet { tol: f64, panels: usize, tail: f64 },
    /// Source of a Newton potential is not integrable against r^(n-1) near 0.
    #[error("source not integrable near the origin")]
    NonIntegrableSource,
    /// Test-function support sticks out of the field's domain.
    #[error("bump support [{lo:.4e}, {hi:.4e}] exceeds the domain radius {domain:.4e}")]
    Support { lo: f64, hi: f64, domain: f64 },
    /// Invalid configuration of a scan or sampler.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
