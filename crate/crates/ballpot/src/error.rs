//! Error type shared across the toolkit.

use alloc::string::String;
use core::fmt;

/// Errors surfaced by kernel evaluation, quadrature, the fixed-point
/// solver and the simulator.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two-point kernel evaluated on its diagonal.
    SingularEvaluation,
    /// An argument violates a documented precondition.
    Domain(&'static str),
    /// Constructor rejected a parameter.
    InvalidParameter(&'static str),
    /// The singular-weight integral keeps growing under refinement.
    NotInKatoClass { last: f64, previous: f64 },
    /// Refinement did not settle below the requested tolerance.
    QuadratureFailure { last: f64, previous: f64 },
    /// Residual grew over several consecutive sweeps.
    NonContractive { residual: f64, sweeps: usize },
    /// A converged kernel table carries negative entries beyond -tol.
    PositivityViolation { value: f64, reference: f64 },
    /// Two computation routes for the same kernel disagree badly.
    InconsistentKernelTable { primary: f64, cross_check: f64 },
    /// Boundary measure with no mass.
    ZeroMeasure,
    /// Too many paths still alive at the time horizon.
    MaxTimeTooSmall { censored_fraction: f64 },
    /// Free-form failure from an orchestrated run.
    Failed(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SingularEvaluation => write!(f, "singular evaluation: coincident points"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::NotInKatoClass { last, previous } => write!(
                f,
                "not in Kato class: integral diverging under refinement ({previous} -> {last})"
            ),
            Error::QuadratureFailure { last, previous } => write!(
                f,
                "quadrature failure: refinement did not converge ({previous} -> {last})"
            ),
            Error::NonContractive { residual, sweeps } => write!(
                f,
                "non-contractive after {sweeps} sweeps (residual {residual}); \
                 reduce drift strength or refine grid"
            ),
            Error::PositivityViolation { value, reference } => write!(
                f,
                "positivity violation: kernel value {value} against reference {reference}"
            ),
            Error::InconsistentKernelTable {
                primary,
                cross_check,
            } => write!(
                f,
                "inconsistent kernel table: {primary} vs cross-check {cross_check}"
            ),
            Error::ZeroMeasure => write!(f, "boundary measure has zero total mass"),
            Error::MaxTimeTooSmall { censored_fraction } => write!(
                f,
                "max_time too small: censored fraction {censored_fraction}"
            ),
            Error::Failed(msg) => write!(f, "{msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
