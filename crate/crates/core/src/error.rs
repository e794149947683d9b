//! Error types shared across the crate.

/// Crate-wide error type.
///
/// Numerical routines distinguish between *infeasible inputs* (a meaningful
/// physical outcome, e.g. [`Error::Infeasible`]) and *invalid inputs*
/// (programming or configuration mistakes, e.g. [`Error::InvalidSpec`]).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Lattice or channel parameters violate their constraints.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// A gain profile is not symmetric under negation of the offset, so the
    /// coupling matrix is not circulant-symmetric and the spectrum would be
    /// complex.
    #[error("gain profile is not reflection-symmetric: max imaginary part {imag_max:e}")]
    Asymmetry { imag_max: f64 },

    /// The target SINR admits no componentwise-positive power vector on the
    /// active sublattice.
    #[error(
        "infeasible target: min active eigenvalue {min_active_eigenvalue:e}, \
         {nonpositive_powers} non-positive power(s)"
    )]
    Infeasible {
        min_active_eigenvalue: f64,
        nonpositive_powers: usize,
    },

    /// Every link in the mask is erased; there is no power system to solve.
    #[error("no active links")]
    EmptyNetwork,

    /// The regularized system could not be factorized.
    #[error("regularized system is numerically singular (eps = {eps:e})")]
    SingularSystem { eps: f64 },

    /// An argument lies outside the domain of the requested function, e.g. a
    /// resolvent evaluated at or beyond a spectral pole.
    #[error("domain error: {0}")]
    Domain(String),

    /// The fixed-point equation has no root: the target is past the
    /// feasibility edge for this erasure fraction.
    #[error("fixed-point equation has no root")]
    NoSolution,

    /// The mean power diverges because the fixed point sits at the bottom of
    /// the spectrum.
    #[error("mean power diverges: beta + lambda0 = {value:e} <= 0")]
    Divergence { value: f64 },

    /// The variance denominator vanishes: the fixed point sits exactly at
    /// the spectral edge where fluctuations blow up.
    #[error("variance denominator vanished: {denominator:e}")]
    Edge { denominator: f64 },

    /// The mean-field power formula has a non-positive denominator.
    #[error("mean-field denominator non-positive: {denominator:e}")]
    MeanFieldInfeasible { denominator: f64 },

    /// Two result tables that must share a (gamma, e) grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A run configuration file is missing, malformed, or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// An input data file does not match any recognized column schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// Filesystem failure while reading inputs or writing outputs.
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// Wraps a filesystem-level error with the path it occurred on.
    pub fn io(path: impl AsRef<std::path::Path>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
