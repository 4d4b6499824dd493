//! Synthetic multi-reader cohorts.
//!
//! Reader variability is built from three independently switchable parts:
//! a per-reader weighting of latent image attributes, a monotone
//! piecewise-linear calibration of the 0–100 scale, and additive Gaussian
//! error clipped to the scale. Features come from a fixed seeded random
//! embedding of the latent attributes and the view.

mod cohort;
mod config;
mod preset;
mod profile;

pub use cohort::{reader_score, simulate_case_control, simulate_cohort, Cohort, TruthRecord, TruthTable, WomanTruth};
pub use config::{uniform_pairing, Embedding, SimConfig, TruthDistribution};
pub use preset::reader_ring;
pub use profile::{uniform_weights, weighted_attribute, DistTransform, ReaderProfile};
