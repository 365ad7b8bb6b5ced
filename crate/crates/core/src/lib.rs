//! Feedback stabilization of the 2D vorticity equation with an exponential
//! memory kernel, on the torus `[0, 2pi]^2`.
//!
//! The integro-differential dynamics
//!
//! ```text
//! w_t - eta Lap w + (k*w).grad w - kappa int_0^t e^{-lambda(t-s)} Lap w(s) ds
//!     = f_inf + u chi_O
//! ```
//!
//! are rewritten as a first-order coupled system by introducing the memory
//! variable `v(t) = int_0^t e^{-lambda(t-s)} z(s) ds`. The library provides:
//!
//! * closed-form spectral theory of the coupled principal operator
//!   (eigenvalues `mu_k^+/-`, bi-orthogonal eigenfamilies, Riesz expansions),
//! * finite spectral truncation with a localized control patch, Hautus
//!   stabilizability checks, and Riccati feedback synthesis `K = -B* P`,
//! * pseudospectral closed-loop time integration (linear and nonlinear),
//!   Biot-Savart velocity recovery, steady-state solves, and decay-rate
//!   fitting,
//! * an experiment runner that orchestrates the full pipeline and persists
//!   reproducible records.

// Lockstep-indexed loops over coefficient arrays read better than zipped
// iterator chains in the numerical kernels.
#![allow(clippy::needless_range_loop)]

pub mod basis;
pub mod biot_savart;
pub mod config;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod gain_io;
pub mod hautus;
pub mod linalg;
pub mod memory;
pub mod nonlinear;
pub mod params;
pub mod quadrature;
pub mod region;
pub mod riccati;
pub mod riesz;
pub mod spectral;
pub mod state;
pub mod steady;
pub mod stepper;
pub mod system;
pub mod verify;

pub use basis::{FourierBasis, SpectralTransform};
pub use error::{Error, Result};
pub use params::PhysicalParams;
pub use region::ControlRegion;
pub use riccati::GainOperator;
pub use spectral::{CoupledEigenpair, CoupledSpectrum};
pub use state::SpectralState;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
