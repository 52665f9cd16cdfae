//! Forward-only implementation of a viewport-based quality model for
//! omnidirectional images with non-uniform distortion.
//!
//! The pipeline runs a four-stage feature pyramid per viewport, unifies channel
//! widths, fuses scales along the token axis (MFF), builds a guidance map that is
//! re-weighted across viewports (VAC) and channels (ACAC), fuses both branches,
//! aggregates all viewport tokens with multi-head attention (VV) and regresses a
//! scalar score.

pub mod attention;
pub mod backbone;
pub mod config;
pub mod container;
pub mod fusion;
pub mod head;
pub mod model;
pub mod tensor;
pub mod weights;

use std::path::Path;

pub use backbone::{Backbone, FeatureStack, PrecomputedFeatures, RandomProjectionBackbone};
pub use config::{CamAxis, ModelConfig, Upsample};
pub use model::{ForwardOutput, ForwardTrace, Oiqand};
pub use tensor::{Tensor, TensorSummary};
pub use weights::ModelWeights;

use oiqa_core::{Error, Result};

/// Writes weights with the model configuration in the header.
pub fn save_weights(path: &Path, w: &ModelWeights) -> Result<()> {
    container::write_container(path, serde_json::json!({ "config": w.config }), &w.named_tensors())
}

pub fn load_weights(path: &Path) -> Result<ModelWeights> {
    let (meta, tensors) = container::read_container(path)?;
    let config: ModelConfig = serde_json::from_value(
        meta.get("config")
            .cloned()
            .ok_or_else(|| Error::Invariant("weights header lacks a config".into()))?,
    )?;
    ModelWeights::from_named(config, tensors)
}
