//! Resource estimation and desk-scale simulation for the randomized-adiabatic
//! quantum linear-systems solver.
//!
//! The crate is organised bottom-up:
//!
//! * [`special_fns`]: Bessel J, Lambert W, Chebyshev T.
//! * [`schedule`]: gap bound, schedule reparametrisation, step counts.
//! * [`sampling`]: band-limited random evolution-time distributions.
//! * [`polyapprox`]: Jacobi-Anger truncation, amplitude amplification, eigenstate filter.
//! * [`cost_model`]: closed-form query counts and error budgets.
//! * [`dense_sim`]: dense simulation of the full protocol on small systems.

pub mod cost_model;
pub mod dense_sim;
pub mod error;
pub mod linalg;
pub mod polyapprox;
pub mod quadrature;
pub mod sampling;
pub mod schedule;
pub mod special_fns;

pub use error::{Error, Result};
