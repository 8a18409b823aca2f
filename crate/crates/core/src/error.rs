use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (relative defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not unitary (||U*U - I||_F = {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("invalid channel: {invariant}")]
    InvalidChannel { invariant: String },

    #[error("invalid Holevo form: {invariant}")]
    InvalidHolevo { invariant: String },

    #[error("invalid density operator: {invariant}")]
    InvalidDensity { invariant: String },

    #[error("invalid vector: {0}")]
    InvalidVector(String),

    #[error("no unital {r}-tuple of {m}x{n} operators exists (need r*m >= n)")]
    EmptyManifold { n: usize, m: usize, r: usize },

    #[error("size guard exceeded: {size} > {guard}")]
    SizeGuard { size: usize, guard: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mixing unitary recovery failed: {0}")]
    MixingRecovery(String),

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Numerical failures are distinguished from bad input by callers that map
    /// errors to process exit codes.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NumericalFailure(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
