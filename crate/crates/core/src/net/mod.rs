//! Feedforward encoder with one or several linear output heads, trained on
//! a masked squared-error objective.

mod io;
mod network;
mod train;

pub use io::{load_network, write_network, write_training_log};
pub use network::{init_network, masked_loss, Dense, Forward, Gradients, Network, NetworkArch};
pub use train::{extract_representations, train, EpochLog, MaskedBatch, TrainConfig, TrainedNetwork};
