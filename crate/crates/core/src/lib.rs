//! Compiler and verifier for measurement-based continuous-variable gates with
//! polynomial quadrature Hamiltonians.

pub mod circuit;
pub mod coupling;
pub mod decompose;
pub mod error;
pub mod polyring;
pub mod strategies;
pub mod linalg;
pub mod weyl;

pub use error::{Error, Result};
