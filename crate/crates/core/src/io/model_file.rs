//! Self-describing JSON model file.
//!
//! Grids are base64-encoded little-endian f64 arrays, so two runs with the
//! same inputs produce byte-identical files. See the README for the field
//! reference.

use std::path::Path;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::descriptor::{GridSpec, StandardizationStats};
use crate::filtration::Convention;
use crate::io::{atomic_write, IoError};
use crate::model::RidgeModel;

const FORMAT: &str = "phdesc-model";
const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    bins: u32,
    lo: f64,
    hi: f64,
    convention: Convention,
    cutoff: f64,
    lambda: f64,
    seed: u64,
    split: f64,
    intercept: f64,
    weights: String,
    stats_fitted_on: u32,
    stats_epsilon: f64,
    stats_mean: String,
    stats_std: String,
}

fn encode_f64s(values: &[f64]) -> String {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    BASE64.encode(bytes)
}

fn decode_f64s(text: &str, expected: usize, what: &str) -> Result<Vec<f64>, IoError> {
    let bytes = BASE64
        .decode(text)
        .map_err(|e| IoError::Format(format!("bad base64 in {what}: {e}")))?;
    if bytes.len() != expected * 8 {
        return Err(IoError::Format(format!(
            "{what} has {} bytes, expected {}",
            bytes.len(),
            expected * 8
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn model_to_json(model: &RidgeModel) -> Result<Vec<u8>, IoError> {
    let file = ModelFile {
        format: FORMAT.to_string(),
        version: VERSION,
        bins: model.spec.bins,
        lo: model.spec.lo,
        hi: model.spec.hi,
        convention: model.convention,
        cutoff: model.cutoff,
        lambda: model.lambda,
        seed: model.seed,
        split: model.split,
        intercept: model.intercept,
        weights: encode_f64s(&model.weights),
        stats_fitted_on: model.stats.fitted_on,
        stats_epsilon: model.stats.epsilon,
        stats_mean: encode_f64s(&model.stats.mean),
        stats_std: encode_f64s(&model.stats.std),
    };
    let mut bytes = serde_json::to_vec_pretty(&file)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn write_model(path: &Path, model: &RidgeModel) -> Result<(), IoError> {
    atomic_write(path, &model_to_json(model)?)
}

pub fn read_model(path: &Path) -> Result<RidgeModel, IoError> {
    let bytes = std::fs::read(path)?;
    let file: ModelFile = serde_json::from_slice(&bytes)?;
    if file.format != FORMAT {
        return Err(IoError::Format(format!(
            "not a model file (format `{}`)",
            file.format
        )));
    }
    if file.version != VERSION {
        return Err(IoError::Format(format!(
            "unsupported model version {}",
            file.version
        )));
    }
    let spec = GridSpec::new(file.bins, file.lo, file.hi)
        .map_err(|e| IoError::Format(format!("bad grid spec: {e}")))?;
    let cells = spec.cells();
    let weights = decode_f64s(&file.weights, cells, "weights")?;
    let mean = decode_f64s(&file.stats_mean, cells, "stats mean")?;
    let std = decode_f64s(&file.stats_std, cells, "stats std")?;
    Ok(RidgeModel {
        spec,
        convention: file.convention,
        cutoff: file.cutoff,
        lambda: file.lambda,
        seed: file.seed,
        split: file.split,
        intercept: file.intercept,
        weights,
        stats: StandardizationStats {
            spec,
            mean,
            std,
            epsilon: file.stats_epsilon,
            fitted_on: file.stats_fitted_on,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::STD_EPSILON;

    fn toy_model() -> RidgeModel {
        let spec = GridSpec::new(3, 0.0, 8.0).unwrap();
        RidgeModel {
            spec,
            convention: Convention::SquaredRadius,
            cutoff: 3.5,
            lambda: 200.0,
            seed: 42,
            split: 0.8,
            intercept: -1.5,
            weights: (0..9).map(|i| i as f64 * 0.01 - 0.04).collect(),
            stats: StandardizationStats {
                spec,
                mean: (0..9).map(|i| i as f64 * 0.1).collect(),
                std: (0..9).map(|i| 0.5 + i as f64 * 0.01).collect(),
                epsilon: STD_EPSILON,
                fitted_on: 12,
            },
        }
    }

    #[test]
    fn model_file_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let model = toy_model();
        write_model(&path, &model).unwrap();
        let back = read_model(&path).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn serialization_is_byte_deterministic() {
        let model = toy_model();
        assert_eq!(model_to_json(&model).unwrap(), model_to_json(&model).unwrap());
    }

    #[test]
    fn wrong_format_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        std::fs::write(&path, b"{\"format\":\"nope\"}").unwrap();
        assert!(read_model(&path).is_err());
    }
}
