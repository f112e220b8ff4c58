pub mod analysis;
pub mod cli;
pub mod distributions;
pub mod error;
pub mod grid;
pub mod inequalities;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
