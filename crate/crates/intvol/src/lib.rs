//! Intrinsic volumes of convex bodies and their rotation and rigid-motion reweightings.
//!
//! The weighted sequences normalize to laws of integer random variables whose concentration
//! governs the phase transitions of classical integral-geometry functionals.
//!
//! Volume-like quantities are carried as natural logarithms, with `-inf` standing for zero.

pub mod bodies;
pub mod concentration;
pub mod error;
mod logser;
pub mod phase;
pub mod quadrature;
pub mod specfun;
pub mod verify;
pub mod weighted;

pub use bodies::{BodySpec, Kind, LogSequence};
pub use error::{Error, Result};
pub use weighted::VolumeDistribution;
