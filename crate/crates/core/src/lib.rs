//! A numerical laboratory for density, relative measure, localization and
//! duality of Gabor frames in a finite periodic model.
//!
//! The continuum `R^2` is replaced by the `L x L` time-frequency torus.
//! Signals live on `Z_L`, point sets are finite multisets on the torus, and
//! asymptotic box statistics become finite-`N` sweeps.

pub mod config;
pub mod counterexamples;
pub mod error;
pub mod frame;
pub mod gabor;
pub mod geometry;
pub mod localization;
pub mod measure;
pub mod pointset;
pub mod signal;
pub mod suite;

pub use error::{Error, Result};
