//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, PtError>;

/// Everything that can go wrong while building operators, decomposing
/// spectra, sampling ensembles, or propagating fields.
#[derive(Debug, Error)]
pub enum PtError {
    /// A domain-type invariant was violated (bad N, J, m0, period, ...).
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// Two operands have incompatible shapes.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An operation requiring a Hermitian operator received a non-Hermitian one,
    /// or a disorder builder received the wrong disorder kind.
    #[error("operator kind mismatch: {0}")]
    KindMismatch(String),

    /// The dense eigensolver (or a downstream factorization) failed to converge.
    #[error("linear algebra backend failure: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    /// A nearly degenerate Hermitian spectrum makes the requested operator
    /// ill-defined (parity construction refuses rather than guessing).
    #[error("near-degenerate spectrum: minimum gap {gap:.3e} below floor {floor:.3e}")]
    DegenerateSpectrum { gap: f64, floor: f64 },

    /// A numerical contract was violated at run time (instability, failed fit,
    /// non-finite values).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Not enough samples to compute the requested statistic.
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
}
