//! Visibility revivals of a single photon entangled with a vibrating mirror,
//! including thermal decoherence, mechanical friction and coordinate diffusion.
//!
//! The open-system dynamics is carried entirely by the Gaussian
//! characteristic function of the off-diagonal photon block; see
//! [`propagator`] for the coefficient equations and [`visibility`] for the
//! routes from coefficients to `nu(t)`.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod exec;
pub mod output;
pub mod params;
pub mod propagator;
pub mod quadrature;
pub mod scan;
pub mod validate;
pub mod visibility;

pub use error::{Error, Result};
pub use exec::Execution;
pub use params::{DimensionlessParams, PhysConstants, PhysicalParams};
