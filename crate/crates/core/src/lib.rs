//! Reader variability in breast density estimation: synthetic multi-reader
//! cohorts, ridge mapping, masked multi-reader training, bootstrap
//! evaluation and case-control odds ratios.

pub mod casecontrol;
pub mod data;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod net;
pub mod ridge;
pub mod seed;
pub mod simulate;

pub use error::{Error, Result};
