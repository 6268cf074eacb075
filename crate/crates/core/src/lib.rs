//! Simulation of multiboson correlation interferometry.
//!
//! N single photons in arbitrary pure spectral and polarization states
//! enter an M-port lossless interferometer. This crate computes
//!
//! * time- and polarization-resolved N-fold detection rates |perm T|²
//!   ([`correlation`]),
//! * probabilities of detections that resolve neither time nor polarization,
//!   as a permutation sum of overlap factors and interference permanents
//!   ([`averaged`]),
//! * exact samples of complete detection events ([`sampling`]),
//!
//! on top of a Ryser permanent kernel ([`permanent`]), interferometer
//! builders ([`network`]) and photon wavepackets ([`photonics`]).

pub mod averaged;
pub mod cli;
pub mod config;
pub mod correlation;
pub mod error;
pub mod network;
pub mod output;
pub mod permanent;
pub mod photonics;
pub mod quadrature;
pub mod sampling;
pub mod types;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
