//! Information-theoretic functionals of one-dimensional log-concave densities,
//! the moment–entropy and capacity bounds they satisfy, and a constrained
//! Blahut–Arimoto solver for additive-noise channels.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what every tolerance in the crate is
//! calibrated for.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ba;
pub mod capacity;
pub mod density;
pub mod error;
pub mod extremal;
pub mod functionals;
pub mod inequality;
pub mod quad;
pub mod real;
pub mod special;

pub use error::{Error, Result};
pub use real::Real;

pub type Piecewise = density::PiecewiseLogLinearDensity<f64>;
pub type Grid = density::GridDensity<f64>;
pub type Positive = density::PositiveDensity<f64>;
pub type MixtureSpec = density::GaussianMixtureSpec<f64>;
