//! Exact Gaussian solutions of the generic bilinear master equation for a
//! damped quantum oscillator.

pub mod algebra;
pub mod catalog;
pub mod cli;
pub mod generators;
pub mod evolution;
pub mod propagator;
pub mod stationary;
