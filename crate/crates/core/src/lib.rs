//! Simulation and verification tools for a two-dimensional exclusion process
//! whose jump rates are perturbed by face rotations.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuum;
pub mod error;
pub mod exact;
pub mod exec;
pub mod fenwick;
pub mod fields;
pub mod hydro;
pub mod io;
pub mod lattice;
pub mod model;
pub mod observables;
pub mod sim;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
