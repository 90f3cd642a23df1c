//! Pseudospectral laboratory for the steady passive-tracer equation
//! `-Δθ + u·∇θ = g` on the 2π-periodic torus.
//!
//! The crate synthesizes random-phase velocities, solves the Galerkin-truncated
//! tracer problem and its low/high-mode decomposition, accumulates ensemble
//! shell spectra against the exact expected-spectrum oracle, and evaluates the
//! inequalities and kernel bounds behind the Batchelor–Howells–Townsend law.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod solver;
pub mod spectral;
pub mod velocity;
pub mod verify;

pub use error::{Error, Result};
pub use spectral::{Lattice, ShellSpectrum, SpectralField, VectorField};
