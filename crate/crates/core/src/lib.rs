//! Synchronized equilibria of the finite Kuramoto model with evenly spaced
//! natural frequencies: enumeration, bifurcations, spectral stability and the
//! relation to stationary solutions of the continuum limit.

// Index loops read more naturally than iterator chains in the matrix kernels.
#![allow(clippy::needless_range_loop)]

pub mod bifurcation;
pub mod continuum;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod linalg;
pub mod model;
pub mod roots;
pub mod selfcheck;
pub mod stability;

pub use error::{Error, Result};
