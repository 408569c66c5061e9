//! Pseudo-spectral laboratory for drift-diffusion equations with stable-type
//! Lévy diffusion on the torus: radial multipliers and their kernels, the
//! Burgers/CCF/SQG/IPM velocity laws, an integrating-factor solver, and the
//! modulus-of-continuity machinery used to check nonlocal maximum principles
//! numerically.

pub mod error;
pub mod field;
pub mod grid;
pub mod levy;
pub mod norms;
pub mod profile;
pub mod quad;
pub mod velocity;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use field::Field;
pub use grid::PeriodicGrid;
pub use profile::{ProfileFamily, RadialProfile};
