//! Simulation of pulsed electron–nuclear double resonance (ENDOR) on a
//! single electron spin 1/2 coupled to a nuclear spin 1/2.
//!
//! The crate prepares the four Bell states of the spin pair with
//! transition-selective pulses, detects them through phase-rotation
//! tomography, analyses the resulting phase interferograms and evaluates the
//! positive-partial-transpose (PPT) entanglement threshold of the thermally
//! prepared ensemble.
//!
//! Module map:
//!
//! * [`linalg`] – fixed-size 4×4 complex matrices and a Jacobi eigensolver.
//! * [`spin`] – level map, states, density matrices and spin operators.
//! * [`pulse`] – selective pulses, z-rotations and pulse programs.
//! * [`parser`] – the line-based `.pseq` pulse-program format.
//! * [`config`] – experiment parameters and physical constants.
//! * [`prep`] – thermal / pseudo-pure initial states and Bell preparation.
//! * [`tomography`] – detector sequences, echo signal and phase scans.
//! * [`spectral`] – DFT magnitude spectra and peak picking.
//! * [`imperfections`] – flip-angle errors and phase-surface fits.
//! * [`entanglement`] – partial transpose, negativity and quantum limit.
//!
//! Scans and grid sweeps run on rayon when the `parallel` feature is enabled
//! (the default); see [`Execution`].

pub mod config;
pub mod entanglement;
mod error;
mod exec;
pub mod imperfections;
pub mod linalg;
pub mod numfmt;
pub mod parser;
pub mod prep;
pub mod pulse;
pub mod spectral;
pub mod spin;
pub mod tomography;

pub use error::{Error, Result};
pub use exec::Execution;

pub use num_complex::Complex64 as C64;
