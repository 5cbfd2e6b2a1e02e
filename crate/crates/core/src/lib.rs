//! Exact polyhedral toolkit for relative Lipschitz-like stability of set-valued
//! mappings and conic contingent coderivatives on piecewise-polyhedral data.

pub mod calculus;
pub mod coderivative;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod io;
pub mod local;
pub mod multifunction;
pub mod stability;

pub use error::{Error, Result};
