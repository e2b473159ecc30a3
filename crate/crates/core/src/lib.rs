//! Series solutions of BSDE/FBSDE-type terminal value problems by the homotopy
//! analysis method over an exact term algebra, with numeric diagnostics.

pub mod algebra;
pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod problems;

pub use error::{Error, Result};
