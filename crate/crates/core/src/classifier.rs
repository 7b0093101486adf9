//! Prototype matching of predicted basic-motion probabilities against one
//! basis vector per class, using a smoothed KL divergence.
//!
//! Smaller divergence means more similar, so the decision is the arg min.

use ndarray::Array2;

use crate::dataset::{MotionVocabulary, Pattern};
use crate::error::{Error, Result};
use crate::network::Mlp;

pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Basics first (one-hots), then combineds (`1/K_m` on each constituent).
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    pub vectors: Vec<Vec<f64>>,
    pub epsilon: f64,
}

impl BasisSet {
    pub fn new(vocab: &MotionVocabulary) -> Self {
        Self::with_epsilon(vocab, DEFAULT_EPSILON)
    }

    pub fn with_epsilon(vocab: &MotionVocabulary, epsilon: f64) -> Self {
        let n_basic = vocab.n_basic();
        let vectors = vocab
            .labels()
            .iter()
            .map(|label| {
                let share = 1.0 / label.constituents.len() as f64;
                let mut u = vec![0.0; n_basic];
                for &b in &label.constituents {
                    u[b] = share;
                }
                u
            })
            .collect();
        Self { vectors, epsilon }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

pub fn build_basis(vocab: &MotionVocabulary) -> BasisSet {
    BasisSet::new(vocab)
}

/// `sum_i u_i * ln((u_i + eps) / (yhat_i + eps))`.
pub fn kl_divergence(u: &[f64], yhat: &[f64], epsilon: f64) -> Result<f64> {
    if u.len() != yhat.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            actual: yhat.len(),
        });
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Classifier(format!(
            "epsilon must be > 0, got {epsilon}"
        )));
    }
    Ok(u.iter()
        .zip(yhat)
        .map(|(&ui, &yi)| {
            if ui == 0.0 {
                0.0
            } else {
                ui * ((ui + epsilon) / (yi + epsilon)).ln()
            }
        })
        .sum())
}

/// Index of the most similar basis vector; ties go to the lowest index.
pub fn classify(yhat: &[f64], basis: &BasisSet) -> Result<usize> {
    if basis.is_empty() {
        return Err(Error::Classifier("empty basis set".into()));
    }
    let mut best = (0, f64::INFINITY);
    for (m, u) in basis.vectors.iter().enumerate() {
        let s = kl_divergence(u, yhat, basis.epsilon)?;
        if s < best.1 {
            best = (m, s);
        }
    }
    Ok(best.0)
}

/// Frame-level predictions for a set of patterns.
pub fn classify_patterns(
    model: &Mlp,
    patterns: &[Pattern],
    basis: &BasisSet,
) -> Result<Vec<usize>> {
    let width = basis.vectors.first().map_or(0, Vec::len);
    if model.config().output_dim != width {
        return Err(Error::DimensionMismatch {
            expected: width,
            actual: model.config().output_dim,
        });
    }
    predict_probabilities(model, patterns)?
        .rows()
        .into_iter()
        .map(|row| classify(row.as_slice().expect("standard layout"), basis))
        .collect()
}

/// Arg max of the network output, for models trained on every class directly.
pub fn classify_argmax(model: &Mlp, patterns: &[Pattern]) -> Result<Vec<usize>> {
    Ok(predict_probabilities(model, patterns)?
        .rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &p)| {
                    if p > best.1 {
                        (i, p)
                    } else {
                        best
                    }
                })
                .0
        })
        .collect())
}

pub(crate) fn predict_probabilities(model: &Mlp, patterns: &[Pattern]) -> Result<Array2<f64>> {
    let d = model.config().input_dim;
    let mut x = Array2::zeros((patterns.len(), d));
    for (mut row, p) in x.rows_mut().into_iter().zip(patterns) {
        if p.x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: p.x.len(),
            });
        }
        row.iter_mut().zip(&p.x).for_each(|(dst, &v)| *dst = v);
    }
    model.forward_batch(x.view())
}
