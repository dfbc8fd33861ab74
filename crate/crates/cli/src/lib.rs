//! Experiment runner for growing Boltzmann machines: training with growth
//! curves, entropy curves, topic tables, the corruption/reconstruction
//! benchmark and a synthetic corpus generator.

pub mod commands;
pub mod config;

pub use commands::{
    cmd_entropy, cmd_reconstruct, cmd_synth, cmd_topics, cmd_train, entropy_curve,
    reconstruction_table, train_model, Dataset, TrainOutput,
};
pub use config::ExperimentConfig;
