//! Bayesian single change-point estimation for weekly review counts.
//!
//! The pipeline runs raw reviews through [`ingest`] into a weekly series,
//! samples the segmented-regression posterior of [`model`] with the HMC
//! engine in [`hmc`], checks convergence with [`diagnostics`] and turns the
//! draws into estimates, bands and plots with [`report`]. [`synth`] provides
//! synthetic series and a least-squares oracle for validation.

pub mod diagnostics;
pub mod error;
pub mod hmc;
pub mod ingest;
pub mod model;
pub mod output;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
