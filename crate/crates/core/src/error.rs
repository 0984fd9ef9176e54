use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failures reported by the numerical core.
///
/// Validation failures name the offending field (`b[1]`, `epsilons[0]`, ...)
/// so that drivers can relay them verbatim.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter or argument violates its documented invariant.
    Invalid { field: String, reason: String },
    /// Evaluation requested outside the domain of a function.
    Domain { what: String },
    /// Edge functions that should share one grid do not.
    GridMismatch,
    /// Input is required to be continuous at the graph center but is not.
    NotContinuousAtCenter { gap: f64, tol: f64 },
    /// A cosine evaluation needs more of the image extension than was built.
    WindowExceeded { required: f64, available: f64 },
    /// A numerical guard tripped (overflow risk, unresolvable scales, ...).
    NumericalGuard { reason: String },
    /// A linear system that should be uniquely solvable was singular.
    Singular { context: String },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn guard(reason: impl Into<String>) -> Self {
        Error::NumericalGuard {
            reason: reason.into(),
        }
    }

    /// True for failures caused by numerical limits rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::WindowExceeded { .. } | Error::NumericalGuard { .. } | Error::Singular { .. }
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Invalid { field, reason } => write!(f, "invalid `{field}`: {reason}"),
            Error::Domain { what } => write!(f, "domain error: {what}"),
            Error::GridMismatch => f.write_str("edge functions do not share a grid"),
            Error::NotContinuousAtCenter { gap, tol } => write!(
                f,
                "function is not continuous at the center: gap {gap:e} exceeds {tol:e}"
            ),
            Error::WindowExceeded {
                required,
                available,
            } => write!(
                f,
                "extension window exceeded: need T_max >= {required}, have {available}"
            ),
            Error::NumericalGuard { reason } => write!(f, "numerical guard: {reason}"),
            Error::Singular { context } => write!(f, "singular linear system in {context}"),
        }
    }
}

impl core::error::Error for Error {}
