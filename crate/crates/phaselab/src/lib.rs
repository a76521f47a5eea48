//! Numerical laboratory for a generalized phase-field model of solid–liquid transitions.
//!
//! The model couples an order parameter φ (0 = solid, 1 = liquid) to a rescaled
//! temperature T through
//!
//! ```text
//!   α̂ ∂tφ = ε²Δφ − W′(φ) + γ ν′(φ) T
//!   β̂ ∂tT = δΔT − γ (T + θ) ∂tν(φ) + α̂ (∂tφ)²
//! ```
//!
//! with a double well W and an entropy interpolant ν whose nonlinearity distinguishes
//! the system from the classical Caginalp model (recovered by linearizing the latent
//! heat exchange and dropping the quadratic heat source, see [`pde::ModelForm::Caginalp`]).
//!
//! The crate is organized around that system:
//!
//! * [`potential`] — pluggable (W, ν) families behind a name registry,
//! * [`params`] — parameter charts (physical → nondimensional → runtime → sharp-interface),
//! * [`model`] — pointwise model algebra, energies, entropy, a-priori constants,
//! * [`profile`] — the stationary 1D interface profile and surface tension,
//! * [`field`] — cell-centered grids, boundary conditions, discrete operators,
//! * [`pde`] — IMEX time stepping with conservation/entropy diagnostics,
//! * [`galerkin`] — spectral Galerkin integrator and continuous-dependence experiments,
//! * [`stefan`] — interface extraction, sharp-interface residuals, ε-sweeps, and a
//!   front-tracking reference solver,
//! * [`snapshot`] — plain-text field snapshots and CSV serialization.
//!
//! All simulation code is deterministic: identical inputs produce bit-identical outputs.

pub mod field;
pub mod galerkin;
pub mod linalg;
pub mod model;
pub mod params;
pub mod pde;
pub mod potential;
pub mod profile;
pub mod snapshot;
pub mod stefan;

/// Crate-wide error type.
///
/// Variants map onto the failure classes surfaced by the command-line front end:
/// invalid input data, numerical breakdown during a computation, and boundary-data
/// incompatibilities.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Inputs outside the mathematical domain of an operation (nonpositive physical
    /// parameters, temperatures at or below −θ, malformed array shapes, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed: solver nonconvergence, NaN detection,
    /// bracket failure, or an aborted run.
    #[error("numerical failure: {0}")]
    Numerics(String),

    /// Boundary data admits no solution (e.g. net heat flux through a closed boundary).
    #[error("incompatible boundary data: {0}")]
    Incompatibility(String),

    /// An underlying read or write failed while (de)serializing simulation data.
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn numerics(msg: impl Into<String>) -> Self {
        Error::Numerics(msg.into())
    }
    pub(crate) fn incompatibility(msg: impl Into<String>) -> Self {
        Error::Incompatibility(msg.into())
    }
}
