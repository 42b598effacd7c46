use thiserror::Error;

/// Errors surfaced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate channel realization: no propagation paths and no LOS component")]
    DegenerateChannel,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("frequency bin {0} has a singular effective channel matrix")]
    SingularBin(usize),

    #[error("noise correlation matrix is not positive semidefinite after truncation; use a longer pulse span")]
    IndefiniteNoiseCorrelation,

    #[error("predistorter training basis is rank-deficient; use a richer training distribution")]
    DegenerateTraining,

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("bit count {0} is not divisible by bits per symbol {1}")]
    BitCount(usize, usize),

    #[error("beamformer factorization failed: {0}")]
    Factorization(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
