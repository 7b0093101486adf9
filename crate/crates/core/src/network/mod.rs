//! Fully connected classifier `f = f_n . g_n` with rectifier hidden layers and
//! a normalized-exponential output.
//!
//! Layer index `n` counts hidden layers: `g_0` is the identity and `g_n` for
//! `n >= 1` is the post-activation output of hidden layer `n`.

mod adam;
mod checkpoint;
mod loss;
mod train;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_for;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_SCHEMA_VERSION};
pub use loss::{composite_loss, cross_entropy, softmax_rows, Batch, Gradients, LOG_CLAMP};
pub use train::{train, TrainConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub output_dim: usize,
}

impl ModelConfig {
    pub fn new(input_dim: usize, hidden_dims: Vec<usize>, output_dim: usize) -> Result<Self> {
        let cfg = Self {
            input_dim,
            hidden_dims,
            output_dim,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden_dims.contains(&0) {
            return Err(Error::Network("all layer widths must be at least 1".into()));
        }
        Ok(())
    }

    pub fn n_hidden(&self) -> usize {
        self.hidden_dims.len()
    }

    /// Width of the representation at layer `n` (`n = 0` is the input).
    pub fn width(&self, n: usize) -> Option<usize> {
        match n {
            0 => Some(self.input_dim),
            n => self.hidden_dims.get(n - 1).copied(),
        }
    }

    fn dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.hidden_dims.len() + 2);
        dims.push(self.input_dim);
        dims.extend(&self.hidden_dims);
        dims.push(self.output_dim);
        dims
    }
}

/// One affine map; `weights` is `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Layer {
    fn affine(&self, input: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = input.dot(&self.weights.t());
        out += &self.bias;
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    config: ModelConfig,
    layers: Vec<Layer>,
}

fn relu_in_place(a: &mut Array2<f64>) {
    a.mapv_inplace(|v| v.max(0.0));
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn init(config: &ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = rng_for(seed, &[0x6d6c70]);
        let dims = config.dims();
        let layers = dims
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                Layer {
                    weights: Array2::from_shape_simple_fn((fan_out, fan_in), || {
                        rng.random_range(-bound..bound)
                    }),
                    bias: Array1::zeros(fan_out),
                }
            })
            .collect();
        Ok(Self {
            config: config.clone(),
            layers,
        })
    }

    pub fn from_layers(config: ModelConfig, layers: Vec<Layer>) -> Result<Self> {
        config.validate()?;
        let dims = config.dims();
        if layers.len() != dims.len() - 1 {
            return Err(Error::Network(format!(
                "expected {} layers, got {}",
                dims.len() - 1,
                layers.len()
            )));
        }
        for (l, w) in layers.iter().zip(dims.windows(2)) {
            if l.weights.dim() != (w[1], w[0]) || l.bias.len() != w[1] {
                return Err(Error::Network("layer shapes do not chain".into()));
            }
        }
        Ok(Self { config, layers })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn n_hidden(&self) -> usize {
        self.config.n_hidden()
    }

    fn check_layer(&self, n: usize) -> Result<usize> {
        self.config.width(n).ok_or_else(|| {
            Error::Network(format!(
                "layer {n} out of range 0..={}",
                self.config.n_hidden()
            ))
        })
    }

    fn check_width(expected: usize, actual: usize) -> Result<()> {
        if expected != actual {
            return Err(Error::DimensionMismatch { expected, actual });
        }
        Ok(())
    }

    /// `g_n` applied to each row of `x`.
    pub fn forward_to_batch(&self, n: usize, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_layer(n)?;
        Self::check_width(self.config.input_dim, x.ncols())?;
        let mut h = x.to_owned();
        for layer in &self.layers[..n] {
            h = layer.affine(h.view());
            relu_in_place(&mut h);
        }
        Ok(h)
    }

    /// `f_n` applied to each row of `z`; rows of the result are probability vectors.
    pub fn forward_from_batch(&self, n: usize, z: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let width = self.check_layer(n)?;
        Self::check_width(width, z.ncols())?;
        Ok(softmax_rows(self.logits_from(n, z)))
    }

    pub(crate) fn logits_from(&self, n: usize, z: ArrayView2<'_, f64>) -> Array2<f64> {
        let last = self.layers.len() - 1;
        let mut h = z.to_owned();
        for (i, layer) in self.layers.iter().enumerate().skip(n) {
            h = layer.affine(h.view());
            if i < last {
                relu_in_place(&mut h);
            }
        }
        h
    }

    pub fn forward_batch(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.forward_from_batch(0, x)
    }

    pub fn forward_to(&self, n: usize, x: &[f64]) -> Result<Vec<f64>> {
        let row = ArrayView1::from(x).insert_axis(Axis(0));
        Ok(self.forward_to_batch(n, row)?.into_raw_vec_and_offset().0)
    }

    pub fn forward_from(&self, n: usize, z: &[f64]) -> Result<Vec<f64>> {
        let row = ArrayView1::from(z).insert_axis(Axis(0));
        Ok(self.forward_from_batch(n, row)?.into_raw_vec_and_offset().0)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.forward_from(0, x)
    }

    pub fn n_parameters(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }
}

pub fn init_model(config: &ModelConfig, seed: u64) -> Result<Mlp> {
    Mlp::init(config, seed)
}
