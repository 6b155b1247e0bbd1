//! JSON checkpoints for networks (and the policy's sigma vector).

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use morph_core::{MorphError, Result};

use crate::mlp::{MlpParams, OutputActivation};

/// What the checkpointed network is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckpointRole {
    Policy,
    Value,
    Discriminator,
    Generator,
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    version: u32,
    role: CheckpointRole,
    layer_sizes: Vec<usize>,
    output_activation: OutputActivation,
    /// Row-major flattened weight matrix per layer.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<Vec<f64>>,
}

/// A network checkpoint: parameters, role, and the optional policy sigma.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub role: CheckpointRole,
    pub params: MlpParams,
    pub sigma: Option<Vec<f64>>,
}

impl Checkpoint {
    pub fn new(role: CheckpointRole, params: MlpParams) -> Self {
        Checkpoint {
            role,
            params,
            sigma: None,
        }
    }

    pub fn with_sigma(mut self, sigma: Vec<f64>) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = CheckpointFile {
            version: 1,
            role: self.role,
            layer_sizes: self.params.layer_sizes.clone(),
            output_activation: self.params.output_activation,
            weights: self
                .params
                .weights
                .iter()
                .map(|w| {
                    // nalgebra stores column-major; flatten row-major so the
                    // file reads as one row per output unit.
                    let mut flat = Vec::with_capacity(w.len());
                    for r in 0..w.nrows() {
                        for c in 0..w.ncols() {
                            flat.push(w[(r, c)]);
                        }
                    }
                    flat
                })
                .collect(),
            biases: self.params.biases.iter().map(|b| b.as_slice().to_vec()).collect(),
            sigma: self.sigma.clone(),
        };
        std::fs::write(path, serde_json::to_string(&file)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: CheckpointFile = serde_json::from_str(&text)
            .map_err(|e| MorphError::InvalidInput(format!("{}: {}", path.display(), e)))?;
        if file.version != 1 {
            return Err(MorphError::InvalidInput(format!(
                "unsupported checkpoint version {}",
                file.version
            )));
        }
        let mut params = MlpParams::zeros(&file.layer_sizes, file.output_activation)?;
        if file.weights.len() != params.weights.len() || file.biases.len() != params.biases.len() {
            return Err(MorphError::InvalidInput(
                "checkpoint layer count does not match layer_sizes".into(),
            ));
        }
        for (li, flat) in file.weights.iter().enumerate() {
            let (rows, cols) = (params.weights[li].nrows(), params.weights[li].ncols());
            if flat.len() != rows * cols {
                return Err(MorphError::InvalidInput(format!(
                    "layer {li} weight count {} != {rows}x{cols}",
                    flat.len()
                )));
            }
            let mut w = DMatrix::zeros(rows, cols);
            for r in 0..rows {
                for c in 0..cols {
                    w[(r, c)] = flat[r * cols + c];
                }
            }
            params.weights[li] = w;
        }
        for (li, b) in file.biases.iter().enumerate() {
            if b.len() != params.biases[li].len() {
                return Err(MorphError::InvalidInput(format!(
                    "layer {li} bias count mismatch"
                )));
            }
            params.biases[li] = DVector::from_vec(b.clone());
        }
        if !params.is_finite() {
            return Err(MorphError::InvalidInput(
                "checkpoint contains non-finite parameters".into(),
            ));
        }
        Ok(Checkpoint {
            role: file.role,
            params,
            sigma: file.sigma,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_full_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("policy.json");
        let params = MlpParams::init(&[4, 6, 3], OutputActivation::None, 2f64.sqrt(), 0.01, 42)
            .unwrap();
        let ckpt = Checkpoint::new(CheckpointRole::Policy, params.clone())
            .with_sigma(vec![0.05; 3]);
        ckpt.save(&path).unwrap();
        let loaded = Checkpoint::load(&path).unwrap();
        assert_eq!(loaded.role, CheckpointRole::Policy);
        assert_eq!(loaded.params, params);
        assert_eq!(loaded.sigma, Some(vec![0.05; 3]));
    }

    #[test]
    fn malformed_checkpoint_is_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{\"version\":1}").unwrap();
        assert!(matches!(
            Checkpoint::load(&path),
            Err(MorphError::InvalidInput(_))
        ));
    }
}
