//! Turning-arcs simulation of isotropic Gaussian random fields on spheres.

pub mod cli;
pub mod covariance;
pub mod degree;
pub mod diagnostics;
pub mod error;
pub mod gegenbauer;
pub mod grid;
pub mod output;
pub mod quadrature;
pub mod simulator;
pub mod special;
pub mod sphere;

pub use error::{Error, Result, Violation};
