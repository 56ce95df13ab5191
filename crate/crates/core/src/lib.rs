pub mod cli;
pub mod data;
pub mod error;
pub mod losses;
pub mod prox;
pub mod solver;
pub mod spectral;
pub mod svd;
pub mod vecnorm;

pub use error::{Error, Result};
