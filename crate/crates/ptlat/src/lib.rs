//! Simulation toolkit for one-dimensional tight-binding lattices with
//! balanced gain and loss and commensurate periodic disorder.
//!
//! The crate answers one family of questions: if a chain of `N` coupled
//! sites carries amplification `+iγ` at site `m0` and matching absorption at
//! the mirror site `N+1−m0`, for which disorder patterns does the spectrum
//! stay real (bounded dynamics) up to a finite γ, and where does it break?
//!
//! Organization:
//!
//! * [`model`] — lattice, disorder, and gain/loss specifications; Hamiltonian
//!   assembly.
//! * [`spectral`] — eigensolvers, the analytic clean-chain solution, and
//!   bisection for the breaking threshold γ_PT, including phase-diagram
//!   sweeps over gain position and disorder period.
//! * [`symmetry`] — reflection-type operators built from eigenbases, the
//!   site-resolved asymmetry measure, and the commensurability predicate for
//!   protected configurations.
//! * [`dynamics`] — propagators `exp(−iHt)` (spectral or Padé), intensity
//!   traces, disorder averaging, and growth-based phase classification.
//! * [`ensemble`] — counter-based reproducible disorder sampling, threshold
//!   histograms, moments, and Kolmogorov–Smirnov comparisons.
//! * [`bpm`] — a split-step beam-propagation solver for waveguide arrays
//!   realizing the same lattice physics in continuous optics.
//!
//! All site and eigenvalue indices in public APIs are 1-based, matching the
//! conventions of the underlying lattice problem; array storage is 0-based.

// Validation guards are written as `!(x > 0.0)` rather than `x <= 0.0` so
// that NaN fails them too; the negated form is the whole point.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

/// Crate version, for embedding in result manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod bpm;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod model;
pub mod spectral;
pub mod symmetry;

pub use bpm::{GridSpec, IntensityMap, WaveguideArraySpec};
pub use dynamics::{IntensityTrace, Phase};
pub use error::{PtError, Result};
pub use model::{
    DisorderKind, DisorderRealization, DisorderSpec, Distribution, GainLossSpec, Hamiltonian,
    LatticeSpec,
};
pub use spectral::{PhaseDiagram, Spectrum, ThresholdResult, ThresholdSearch};
pub use symmetry::{ParityOperator, SignString};
