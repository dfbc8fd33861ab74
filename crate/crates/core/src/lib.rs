//! Self-growing Boltzmann machines for streaming context discovery over
//! bag-of-objects scenes.
//!
//! A scene is the set of object labels observed together, encoded as a binary
//! vector over a fixed [`Vocabulary`]. Models consume scenes one at a time and
//! decide on their own when to add a hidden unit (a new context) or a new
//! layer (a context hierarchy).

pub mod data;
pub mod error;
pub mod growth;
pub mod io;
pub mod metrics;
pub mod model;
pub mod rbm;

pub use data::{SceneRecord, SyntheticSpec, Vocabulary};
pub use error::{Error, Result};
pub use growth::{ConfidenceRule, ConfidenceState, LayerGrowthState, ModelConfidence, NeuronInit};
pub use metrics::{ContextCounts, CorruptionResult, EntropyReport, ReconstructionScores};
pub use model::{
    GrowingModel, GrowthEvent, GrowthKind, LayerState, ModelConfig, ReconstructionMode, TrainMode,
    Variant,
};
pub use rbm::{HiddenState, RbmLayer, SceneVector};
