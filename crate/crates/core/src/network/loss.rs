//! Cross-entropy, the two-term composite loss and its exact gradient.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::{Layer, Mlp};
use crate::error::{Error, Result};

/// Lower clamp applied to probabilities inside every logarithm of the loss.
pub const LOG_CLAMP: f64 = 1e-12;

/// Row-wise normalized exponential, shifted by the row maximum.
pub fn softmax_rows(mut logits: Array2<f64>) -> Array2<f64> {
    for mut row in logits.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    logits
}

/// `-sum_m target_m * ln(max(yhat_m, LOG_CLAMP))`.
pub fn cross_entropy(yhat: &[f64], target: &[f64]) -> Result<f64> {
    if yhat.len() != target.len() {
        return Err(Error::DimensionMismatch {
            expected: target.len(),
            actual: yhat.len(),
        });
    }
    Ok(yhat
        .iter()
        .zip(target)
        .map(|(&p, &t)| {
            if t == 0.0 {
                0.0
            } else {
                -t * p.max(LOG_CLAMP).ln()
            }
        })
        .sum())
}

/// Inputs (one row per sample) with matching target probability rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub inputs: Array2<f64>,
    pub targets: Array2<f64>,
}

impl Batch {
    pub fn new(inputs: Array2<f64>, targets: Array2<f64>) -> Result<Self> {
        if inputs.nrows() != targets.nrows() {
            return Err(Error::DimensionMismatch {
                expected: inputs.nrows(),
                actual: targets.nrows(),
            });
        }
        Ok(Self { inputs, targets })
    }

    pub fn empty(input_dim: usize, output_dim: usize) -> Self {
        Self {
            inputs: Array2::zeros((0, input_dim)),
            targets: Array2::zeros((0, output_dim)),
        }
    }

    pub fn from_rows(inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<Self> {
        let to_matrix = |rows: &[Vec<f64>]| -> Result<Array2<f64>> {
            let cols = rows.first().map_or(0, Vec::len);
            let mut flat = Vec::with_capacity(rows.len() * cols);
            for r in rows {
                if r.len() != cols {
                    return Err(Error::DimensionMismatch {
                        expected: cols,
                        actual: r.len(),
                    });
                }
                flat.extend_from_slice(r);
            }
            Ok(Array2::from_shape_vec((rows.len(), cols), flat).expect("shape checked"))
        };
        Self::new(to_matrix(inputs)?, to_matrix(targets)?)
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.nrows() == 0
    }
}

/// Parameter-shaped gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn zeros_like(model: &Mlp) -> Self {
        Self {
            layers: model
                .layers()
                .iter()
                .map(|l| Layer {
                    weights: Array2::zeros(l.weights.raw_dim()),
                    bias: Array1::zeros(l.bias.raw_dim()),
                })
                .collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| {
                l.weights
                    .iter()
                    .chain(l.bias.iter())
                    .map(|g| g * g)
                    .sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }
}

impl Mlp {
    fn check_batch(&self, batch: &Batch, layer: usize) -> Result<()> {
        let width = self.check_layer(layer)?;
        if batch.is_empty() {
            return Ok(());
        }
        Self::check_width(width, batch.inputs.ncols())?;
        Self::check_width(self.config.output_dim, batch.targets.ncols())
    }

    /// Mean cross-entropy of `batch` propagated from `layer`; gradients of
    /// layers `layer..` are accumulated into `grads`.
    fn branch(&self, batch: &Batch, layer: usize, grads: &mut Gradients) -> f64 {
        if batch.is_empty() {
            return 0.0;
        }
        let last = self.layers.len() - 1;
        let scale = 1.0 / batch.len() as f64;

        // post-activation inputs to each layer from `layer` on
        let mut acts: Vec<Array2<f64>> = vec![batch.inputs.clone()];
        for (i, l) in self.layers.iter().enumerate().skip(layer) {
            let mut h = l.affine(acts.last().expect("nonempty").view());
            if i < last {
                h.mapv_inplace(|v| v.max(0.0));
            }
            acts.push(h);
        }
        let probs = softmax_rows(acts.pop().expect("output layer"));

        let mut loss = 0.0;
        let mut delta = Array2::zeros(probs.raw_dim());
        for ((p, t), mut d) in probs
            .rows()
            .into_iter()
            .zip(batch.targets.rows())
            .zip(delta.rows_mut())
        {
            // d/dlogit of -sum t ln(max(p, clamp)); clamped terms are flat
            let mut active_mass = 0.0;
            for (&pm, &tm) in p.iter().zip(t.iter()) {
                if tm != 0.0 {
                    loss -= tm * pm.max(LOG_CLAMP).ln();
                }
                if pm > LOG_CLAMP {
                    active_mass += tm;
                }
            }
            for ((dj, &pj), &tj) in d.iter_mut().zip(p.iter()).zip(t.iter()) {
                let hit = if pj > LOG_CLAMP { tj } else { 0.0 };
                *dj = (pj * active_mass - hit) * scale;
            }
        }

        for i in (layer..=last).rev() {
            let input = &acts[i - layer];
            let g = &mut grads.layers[i];
            g.weights += &delta.t().dot(input);
            g.bias += &delta.sum_axis(Axis(0));
            if i > layer {
                let mut back = delta.dot(&self.layers[i].weights);
                back.zip_mut_with(input, |b, &a| {
                    if a <= 0.0 {
                        *b = 0.0
                    }
                });
                delta = back;
            }
        }
        loss * scale
    }

    /// Composite loss and its gradient. The synthetic branch enters at
    /// `layer` and only reaches parameters above it.
    pub fn backward(&self, basic: &Batch, synth: &Batch, layer: usize) -> Result<(f64, Gradients)> {
        self.check_batch(basic, 0)?;
        self.check_batch(synth, layer)?;
        let mut grads = Gradients::zeros_like(self);
        let basic_loss = self.branch(basic, 0, &mut grads);
        let synth_loss = self.branch(synth, layer, &mut grads);
        Ok((basic_loss + synth_loss, grads))
    }

    fn mean_loss(
        &self,
        inputs: ArrayView2<'_, f64>,
        targets: ArrayView2<'_, f64>,
        layer: usize,
    ) -> f64 {
        if inputs.nrows() == 0 {
            return 0.0;
        }
        let probs = softmax_rows(self.logits_from(layer, inputs));
        let total: f64 = probs
            .rows()
            .into_iter()
            .zip(targets.rows())
            .map(|(p, t)| {
                cross_entropy(p.as_slice().expect("contiguous"), &t.to_vec()).expect("widths")
            })
            .sum();
        total / inputs.nrows() as f64
    }
}

/// Mean basic-data cross-entropy plus mean synthetic-data cross-entropy.
pub fn composite_loss(model: &Mlp, basic: &Batch, synth: &Batch, layer: usize) -> Result<f64> {
    model.check_batch(basic, 0)?;
    model.check_batch(synth, layer)?;
    Ok(
        model.mean_loss(basic.inputs.view(), basic.targets.view(), 0)
            + model.mean_loss(synth.inputs.view(), synth.targets.view(), layer),
    )
}
