//! Central tolerance constants used by the verification suites.
//!
//! Grouped by origin: machine-precision identities, quadrature targets, and
//! sampling-pipeline accuracies. Keeping them in one place avoids ad-hoc
//! magic numbers in tests.

/// Identities that hold exactly in f64 arithmetic (sphere constraint,
/// rotation invariance, Hessian symmetry).
pub const EXACT_IDENTITY: f64 = 1e-12;

/// Closed-form jets versus the finite-difference cascade.
pub const JET_VS_FD_REL: f64 = 1e-5;

/// Pointwise residual of the catalog systems, relative to term magnitude.
pub const POINTWISE_RESIDUAL_REL: f64 = 1e-8;

/// Weak-form identity, relative to |LHS| + |RHS|.
pub const WEAK_RESIDUAL_REL: f64 = 1e-6;

/// Residual raised by a 1% perturbation must exceed this (detector
/// non-vacuity).
pub const PERTURBED_RESIDUAL_MIN: f64 = 1e-4;

/// Empirical Lorentz norms versus closed-form constants.
pub const LORENTZ_EMPIRICAL_REL: f64 = 0.01;

/// Newton-potential inversion residual, relative sup-norm on the support.
pub const POTENTIAL_RESIDUAL_REL: f64 = 1e-6;

/// Bilaplacian kernel calibration check on a held-out bump.
pub const BILAP_CALIBRATION_REL: f64 = 1e-3;

/// Critical divergent annulus increments versus the closed form.
pub const DYADIC_INCREMENT_REL: f64 = 1e-10;

/// Fitted log-log slopes versus analytic exponents.
pub const SLOPE_ABS: f64 = 0.05;

/// Relative tail certification used by Sobolev membership integrals; the
/// doubly logarithmic integrands decay like k^-2 per dyadic annulus, which
/// caps how tightly a finite descent can certify the tail.
pub const MEMBERSHIP_TAIL_REL: f64 = 0.05;

/// Corpus entries must annihilate their operator at this level.
pub const CORPUS_OPERATOR_ABS: f64 = 1e-10;
