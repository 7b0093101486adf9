use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{adam_step, AdamState, Batch, Mlp};
use crate::dataset::{MotionVocabulary, Pattern};
use crate::error::{Error, Result};
use crate::mixer::{build_synthetic_set, SynthesisConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            learning_rate: 1.0e-4,
            epochs: 20,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, field: &str) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::config(format!("{field}.batch_size"), "must be >= 1"));
        }
        if self.epochs == 0 {
            return Err(Error::config(format!("{field}.epochs"), "must be >= 1"));
        }
        for (name, v) in [
            ("learning_rate", self.learning_rate),
            ("adam_eps", self.adam_eps),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::config(format!("{field}.{name}"), "must be > 0"));
            }
        }
        for (name, v) in [
            ("adam_beta1", self.adam_beta1),
            ("adam_beta2", self.adam_beta2),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::config(
                    format!("{field}.{name}"),
                    "must lie in (0, 1)",
                ));
            }
        }
        Ok(())
    }
}

fn stack(rows: impl ExactSizeIterator<Item = Vec<f64>>, width: usize) -> Array2<f64> {
    let n = rows.len();
    let flat: Vec<f64> = rows.flatten().collect();
    Array2::from_shape_vec((n, width), flat).expect("uniform rows")
}

/// Minibatch training on the composite loss.
///
/// Each pattern's `motion` id is its one-hot target, so it must be below the
/// model's output width. With `synthesis`, every step pairs a basic minibatch
/// with an equally sized synthetic one; the synthetic set is generated once
/// for layer 0 and regenerated from current weights every epoch otherwise.
/// Returns the mean step loss of each epoch.
pub fn train(
    model: &mut Mlp,
    patterns: &[Pattern],
    vocab: &MotionVocabulary,
    synthesis: Option<&SynthesisConfig>,
    config: &TrainConfig,
) -> Result<Vec<f64>> {
    config.validate("train")?;
    if patterns.is_empty() {
        return Err(Error::Network("no training patterns".into()));
    }
    let input_dim = model.config().input_dim;
    let output_dim = model.config().output_dim;
    if let Some(p) = patterns.iter().find(|p| p.x.len() != input_dim) {
        return Err(Error::DimensionMismatch {
            expected: input_dim,
            actual: p.x.len(),
        });
    }
    if let Some(p) = patterns.iter().find(|p| p.motion >= output_dim) {
        return Err(Error::Network(format!(
            "motion id {} has no output unit (output width {output_dim})",
            p.motion
        )));
    }
    let layer = synthesis.map_or(0, |s| s.layer);
    let synth_width = model
        .config()
        .width(layer)
        .ok_or_else(|| Error::Network(format!("synthesis layer {layer} beyond model depth")))?;
    let synth_count = synthesis.map_or(0, |s| s.resolved_count(patterns.len()));
    if synth_count > 0 && output_dim != vocab.n_basic() {
        return Err(Error::Network(
            "synthetic soft labels need one output per basic motion".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let inputs = stack(patterns.iter().map(|p| p.x.clone()), input_dim);
    let targets = Array2::from_shape_fn((patterns.len(), output_dim), |(i, j)| {
        f64::from(u8::from(patterns[i].motion == j))
    });
    let mut state = AdamState::new(model);
    let mut history = Vec::with_capacity(config.epochs);
    let mut synthetic: Option<Batch> = None;
    let mut basic_order: Vec<usize> = (0..patterns.len()).collect();
    let mut synth_order: Vec<usize> = (0..synth_count).collect();

    for _epoch in 0..config.epochs {
        if let Some(cfg) = synthesis.filter(|_| synth_count > 0) {
            if synthetic.is_none() || layer >= 1 {
                let samples = build_synthetic_set(model, patterns, vocab, cfg, &mut rng)?;
                let n = samples.len();
                synthetic = Some(Batch {
                    inputs: stack(samples.iter().map(|s| s.z.clone()), synth_width),
                    targets: stack(samples.into_iter().map(|s| s.y_soft), output_dim),
                });
                debug_assert_eq!(n, synth_count);
            }
        }

        basic_order.shuffle(&mut rng);
        synth_order.shuffle(&mut rng);
        let mut cursor = 0;
        let mut total = 0.0;
        let mut steps = 0;
        for chunk in basic_order.chunks(config.batch_size) {
            let basic = Batch {
                inputs: inputs.select(Axis(0), chunk),
                targets: targets.select(Axis(0), chunk),
            };
            let synth = match &synthetic {
                Some(set) => {
                    let idx: Vec<usize> = (0..chunk.len())
                        .map(|i| synth_order[(cursor + i) % synth_count])
                        .collect();
                    cursor = (cursor + chunk.len()) % synth_count;
                    Batch {
                        inputs: set.inputs.select(Axis(0), &idx),
                        targets: set.targets.select(Axis(0), &idx),
                    }
                }
                None => Batch::empty(synth_width, output_dim),
            };
            let (loss, grads) = model.backward(&basic, &synth, layer)?;
            adam_step(model, &grads, &mut state, config)?;
            total += loss;
            steps += 1;
        }
        history.push(total / steps as f64);
    }
    Ok(history)
}
