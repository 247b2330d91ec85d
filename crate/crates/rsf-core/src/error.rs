//! Error taxonomy for the crate.
//!
//! Variants split into two classes: *domain* errors (bad inputs: shape
//! mismatches, parameters outside their physical range, malformed matrices)
//! and *numerical* errors (a well-posed computation that failed: eigensolver
//! stagnation, a state drifting outside its cone, truncation overflow).
//! [`Error::is_numerical`] exposes the split so callers can map the classes
//! to distinct exit codes.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A matrix that must be square is not.
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    /// Constructor input exceeded the Hermiticity gate.
    #[error("matrix is not Hermitian: deviation {deviation:.3e} exceeds {tol:.0e}")]
    NotHermitian { deviation: f64, tol: f64 },

    /// A matrix required to be unitary is not.
    #[error("matrix is not unitary: deviation {deviation:.3e} exceeds {tol:.0e}")]
    NotUnitary { deviation: f64, tol: f64 },

    /// A scalar parameter is outside its valid range.
    #[error("domain error: {0}")]
    Domain(String),

    /// Cyclic Jacobi failed to reach the off-diagonal target.
    #[error(
        "eigensolver did not converge after {sweeps} sweeps \
         (off-diagonal norm {off_norm:.3e})"
    )]
    EigenConvergence { sweeps: usize, off_norm: f64 },

    /// A scalar function was evaluated outside its domain on the spectrum.
    #[error("matrix function undefined at eigenvalue {eigenvalue:.17e}")]
    FunctionDomain { eigenvalue: f64 },

    /// A matrix required to be positive semidefinite has a negative
    /// eigenvalue beyond the clipping band.
    #[error(
        "{context}: minimum eigenvalue {min_eigenvalue:.3e} \
         is below the -{tol:.0e} tolerance"
    )]
    NegativeEigenvalue {
        context: &'static str,
        min_eigenvalue: f64,
        tol: f64,
    },

    /// A time step left the admissible state cone; the step size is too
    /// large for the stiffest rate in the generator.
    #[error(
        "integration failed at t = {t:.6}: minimum correlation eigenvalue \
         {min_eigenvalue:.3e}; reduce the time step"
    )]
    Integration { t: f64, min_eigenvalue: f64 },

    /// Steady state requested for a mode with no damping.
    #[error("no steady state: mode {mode} has zero downward rate")]
    NoSteadyState { mode: usize },

    /// The requested quantity is not defined for this generator.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(&'static str),

    /// Entropy production at a zero eigenvalue whose derivative does not
    /// vanish: the rate is genuinely divergent.
    #[error(
        "entropy rate singular: eigenvalue {index} is zero while its \
         derivative component {derivative:.3e} is not"
    )]
    SingularEntropyRate { index: usize, derivative: f64 },

    /// Truncated number-basis dimension guard.
    #[error("number-basis dimension {dim} exceeds the {max} guard")]
    FockTooLarge { dim: usize, max: usize },

    /// Population reached the truncation edge; the comparison is invalid.
    #[error(
        "truncation overflow: top-level population {population:.3e} \
         exceeds {bound:.0e}; raise the cutoff"
    )]
    CutoffOverflow { population: f64, bound: f64 },

    /// Principal logarithm of a unitary failed its round-trip check.
    #[error("unitary logarithm round-trip deviation {deviation:.3e}")]
    LogBranch { deviation: f64 },
}

impl Error {
    /// True for failures of a well-posed computation (map to a distinct
    /// exit code from bad-input errors).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenConvergence { .. }
                | Error::Integration { .. }
                | Error::SingularEntropyRate { .. }
                | Error::CutoffOverflow { .. }
                | Error::LogBranch { .. }
        )
    }
}
