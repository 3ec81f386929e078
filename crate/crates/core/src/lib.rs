//! Classifier-ensemble fusion with generalized mixture (GM) functions.
//!
//! The crate is organised bottom-up:
//!
//! * [`agg`]: aggregation functions, OWA, medians and a directional
//!   monotonicity checker.
//! * [`gm`]: GM functions and the dynamic, per-class weight calculation.
//! * [`ensemble`]: base classifiers, bootstrap ensemble training and the
//!   static / GM fusion rules.
//! * [`eval`]: stratified cross-validation, experiment driver, Friedman and
//!   Nemenyi tests and report formats.
//! * [`props`]: the runnable algebraic property suite.

pub mod agg;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod gm;
pub mod props;
pub mod seed;

pub use error::{Error, Result};
