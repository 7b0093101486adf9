use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{Layer, Mlp, ModelConfig};
use crate::error::{Error, Result};

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows x cols`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    pub config: ModelConfig,
    pub layers: Vec<LayerRecord>,
}

impl From<&Mlp> for Checkpoint {
    fn from(model: &Mlp) -> Self {
        Self {
            schema_version: CHECKPOINT_SCHEMA_VERSION,
            config: model.config().clone(),
            layers: model
                .layers()
                .iter()
                .map(|l| LayerRecord {
                    rows: l.weights.nrows(),
                    cols: l.weights.ncols(),
                    weights: l.weights.iter().copied().collect(),
                    bias: l.bias.to_vec(),
                })
                .collect(),
        }
    }
}

impl TryFrom<Checkpoint> for Mlp {
    type Error = Error;

    fn try_from(ckpt: Checkpoint) -> Result<Self> {
        if ckpt.schema_version != CHECKPOINT_SCHEMA_VERSION {
            return Err(Error::Network(format!(
                "unsupported checkpoint schema {}",
                ckpt.schema_version
            )));
        }
        let layers = ckpt
            .layers
            .into_iter()
            .map(|r| {
                let weights = Array2::from_shape_vec((r.rows, r.cols), r.weights)
                    .map_err(|e| Error::Network(e.to_string()))?;
                Ok(Layer {
                    weights,
                    bias: Array1::from(r.bias),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Mlp::from_layers(ckpt.config, layers)
    }
}

pub fn save_checkpoint(model: &Mlp, path: &Path) -> Result<()> {
    let text = serde_json::to_string(&Checkpoint::from(model)).expect("checkpoint serializes");
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Mlp> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ckpt: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::format(path, e))?;
    Mlp::try_from(ckpt)
}
