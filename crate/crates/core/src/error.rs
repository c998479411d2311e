use std::path::PathBuf;

/// Error type shared by all modules of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A coordinate or frequency lies outside the region where a quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter combination violates a construction invariant.
    #[error("configuration error: {0}")]
    Config(String),

    /// A config file or `--set` assignment could not be interpreted.
    #[error("parse error: key `{key}`: {message}")]
    Parse { key: String, message: String },

    /// A scenario name outside the catalog.
    #[error("unknown scenario `{0}` (expected one of: {1})")]
    UnknownScenario(String, String),

    /// Transfer-matrix entries exceeded the representable range.
    #[error("transfer overflow: {0}")]
    Overflow(String),

    /// `reflect_transmit` on a matrix with vanishing W22.
    #[error("singular boundary condition: |W22| = {w22_abs:e}")]
    SingularBoundary { w22_abs: f64 },

    /// An output was about to be written from data that fails its own checks.
    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable machine-readable discriminant, used by the CLI error format.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Config(_) => "config",
            Error::Parse { .. } => "parse",
            Error::UnknownScenario(..) => "catalog",
            Error::Overflow(_) => "overflow",
            Error::SingularBoundary { .. } => "singular-boundary",
            Error::Invariant(_) => "invariant",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
