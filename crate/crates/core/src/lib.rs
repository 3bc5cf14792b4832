//! Exact periodic-point counts, zeta-function coefficients and rationality
//! verdicts for dynamically affine maps of the projective line over fields
//! of positive characteristic.

pub mod automata;
pub mod dynmap;
pub mod elliptic;
pub mod error;
pub mod families;
pub mod field;
pub mod orders;
pub mod scale;
pub mod twisted;
pub mod zeta;

pub use error::{Error, Result};
