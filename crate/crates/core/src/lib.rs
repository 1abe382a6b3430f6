//! Numerical laboratory for the one-dimensional Kac equation.
//!
//! The crate evolves characteristic functions by the Fourier-side (Bobylev)
//! equation and by truncated Wild sums, samples McKean collision trees,
//! inverts to densities, measures total-variation distance to the Maxwellian
//! and checks Edgeworth-type error bounds for weighted sums.

pub mod angular;
pub mod cli;
pub mod config;
pub mod cumulants;
pub mod datum;
pub mod demo;
pub mod edgeworth;
pub mod error;
pub mod mckean;
pub mod numerics;
pub mod rate;
pub mod spectral;

pub use error::{KacError, Result};
