//! JSON model files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TrainedClassifier;
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "blindprint-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    model: TrainedClassifier,
}

pub fn model_to_json(model: &TrainedClassifier) -> Result<String> {
    let env = Envelope { format: MODEL_FORMAT.into(), version: MODEL_VERSION, model: model.clone() };
    Ok(serde_json::to_string_pretty(&env)?)
}

pub fn model_from_json(text: &str) -> Result<TrainedClassifier> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("format").and_then(|v| v.as_str()) {
        Some(MODEL_FORMAT) => {}
        other => return Err(Error::ModelFormat(format!("unexpected format tag {other:?}"))),
    }
    match value.get("version").and_then(|v| v.as_u64()) {
        Some(v) if v == MODEL_VERSION as u64 => {}
        other => return Err(Error::ModelFormat(format!("unsupported version {other:?}"))),
    }
    let env: Envelope = serde_json::from_value(value)?;
    Ok(env.model)
}

pub fn save_model(model: &TrainedClassifier, path: &Path) -> Result<()> {
    Ok(fs::write(path, model_to_json(model)?)?)
}

pub fn load_model(path: &Path) -> Result<TrainedClassifier> {
    model_from_json(&fs::read_to_string(path)?)
}
