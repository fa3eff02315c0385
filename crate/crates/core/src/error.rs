use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coefficients are not Hermitian-symmetric (defect {0:.3e})")]
    NotHermitian(f64),

    #[error("negative-order multiplier needs a mean-zero input (mean {0:.3e})")]
    NonzeroMean(f64),

    #[error("fractional power of a profile that is not positive (min value {0:.3e})")]
    NonPositiveProfile(f64),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("equilibrium branch lost at b = {0}")]
    EquilibriumLost(f64),

    #[error("continuation failed at a = {a}, b = {b}: {reason}")]
    ContinuationFailed { a: f64, b: f64, reason: String },

    #[error("left the existence regime (k^alpha = {k_alpha:.6}, min profile = {min_profile:.6})")]
    LeftExistenceRegime { k_alpha: f64, min_profile: f64 },

    #[error("bordered Jacobian is singular")]
    DerivativeSolveFailed,

    #[error("QR iteration did not converge")]
    QrFailed,

    #[error("critical basis is degenerate: norm of eta_{0} is {1:.3e}")]
    DegenerateBasis(usize, f64),

    #[error("cubic coefficients are not real (imaginary residue {0:.3e}); critical triple mis-identified")]
    SymmetryViolated(f64),

    #[error("the Bloch frequency must be nonzero")]
    ZeroBlochFrequency,

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
