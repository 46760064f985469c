//! Error type shared across the crate, with process exit-code mapping for the CLI.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("displacement {displacement:?} listed twice with conflicting values {first} and {second}")]
    ConflictingCoupling {
        displacement: Vec<i64>,
        first: f64,
        second: f64,
    },

    #[error("coupling value for displacement {displacement:?} is not finite")]
    NonFiniteCoupling { displacement: Vec<i64> },

    #[error("torus must have at least one axis")]
    EmptyTorus,

    #[error("torus side {side} is too small; every side must be at least 2")]
    DegenerateTorus { side: usize },

    #[error("torus side {side} does not exceed twice the interaction range {range}")]
    TorusTooSmall { side: usize, range: f64 },

    #[error("site index {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("{n_sites} sites exceed the exact-enumeration cap of {cap}")]
    EnumerationCapExceeded { n_sites: usize, cap: usize },

    #[error("cluster updates require a ferromagnetic coupling map (all J(r) >= 0)")]
    NonFerromagnetic,

    #[error("invalid run parameters: {0}")]
    InvalidParams(String),

    #[error("duplicate chain seed {0}; parallel chains need pairwise distinct seeds")]
    DuplicateSeed(u64),

    #[error("sample set is empty or too small: {0}")]
    InsufficientSamples(String),

    #[error("window {window} exceeds half the torus side {side}")]
    WindowTooLarge { window: usize, side: usize },

    #[error("insufficient signal for fit: {0}")]
    InsufficientSignal(String),

    #[error("invalid fit window: {0}")]
    InvalidFitWindow(String),

    #[error("basis matrix is singular or badly conditioned")]
    SingularBasis,

    #[error("basis image of displacement {displacement:?} is not an integer vector")]
    NonIntegerImage { displacement: Vec<i64> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("file format error in {path}: {message}")]
    FileFormat { path: String, message: String },

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("property check failed: {0}")]
    CheckFailed(String),

    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line tool:
    /// 2 = config error, 3 = admissibility / precondition violation,
    /// 4 = property-check or integrity failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Integrity(_) | Error::CheckFailed(_) => 4,
            _ => 3,
        }
    }
}
