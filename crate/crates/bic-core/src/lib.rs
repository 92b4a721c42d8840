//! Bound states in the continuum, unstable-state poles and critical spacings
//! for an array of two-level emitters coupled to a 1D massive boson field.
//!
//! Units: the boson mass is 1; energies in units of m, lengths in 1/m.

pub mod cli;
pub mod error;
pub mod oracle;
pub mod params;
pub mod poles;
pub mod parity;
pub mod quad;
pub mod roots;
pub mod specfun;
pub mod spectrum;

pub use error::{BicError, Result};
pub use num_complex::Complex64 as C64;
pub use params::{EmitterArrayParams, ParitySector, Sheet, Tolerances};
