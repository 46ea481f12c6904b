//! Topological statistics for grid-sampled random fields.
//!
//! The pipeline runs from simulation to classification:
//!
//! 1. [`grf`] draws stationary Gaussian random fields with Matérn covariance
//!    and applies pointwise model transforms.
//! 2. [`cubical`] builds the sublevel-set filtration of a [`ScalarField`] on the
//!    standard cubical grid, extending vertex values to edges and faces by the
//!    maximum rule.
//! 3. [`persistence`] reduces the boundary matrix over GF(2) and returns the
//!    degree-0 and degree-1 persistence diagram under reduced homology.
//! 4. [`critical`] computes the local critical-point census from lower stars.
//! 5. [`landscape`] samples persistence landscapes into flat feature vectors.
//! 6. [`classify`] trains a linear soft-margin SVM with Platt calibration.
//! 7. [`harness`] wires the stages into experiments and the `topostat` CLI.

pub mod classify;
pub mod critical;
pub mod cubical;
mod error;
pub mod field;
pub mod grf;
pub mod harness;
pub mod landscape;
pub mod persistence;

pub use error::{Error, Result};
pub use field::ScalarField;
