use ndarray::Zip;

use super::{Gradients, Mlp, TrainConfig};
use crate::error::{Error, Result};

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first: Gradients,
    pub second: Gradients,
    pub t: u64,
}

impl AdamState {
    pub fn new(model: &Mlp) -> Self {
        Self {
            first: Gradients::zeros_like(model),
            second: Gradients::zeros_like(model),
            t: 0,
        }
    }
}

fn same_shapes(a: &Gradients, model: &Mlp) -> bool {
    a.layers.len() == model.layers().len()
        && a.layers
            .iter()
            .zip(model.layers())
            .all(|(g, l)| g.weights.dim() == l.weights.dim() && g.bias.len() == l.bias.len())
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(
    model: &mut Mlp,
    grads: &Gradients,
    state: &mut AdamState,
    config: &TrainConfig,
) -> Result<()> {
    if !same_shapes(grads, model)
        || !same_shapes(&state.first, model)
        || !same_shapes(&state.second, model)
    {
        return Err(Error::Network(
            "gradient or optimizer state shape mismatch".into(),
        ));
    }
    state.t += 1;
    let (b1, b2) = (config.adam_beta1, config.adam_beta2);
    let t = state.t as i32;
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    let lr = config.learning_rate;
    let eps = config.adam_eps;

    let update = |p: &mut f64, g: &f64, m: &mut f64, v: &mut f64| {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    };

    for (i, layer) in model.layers_mut().iter_mut().enumerate() {
        let g = &grads.layers[i];
        let m = &mut state.first.layers[i];
        let v = &mut state.second.layers[i];
        Zip::from(&mut layer.weights)
            .and(&g.weights)
            .and(&mut m.weights)
            .and(&mut v.weights)
            .for_each(update);
        Zip::from(&mut layer.bias)
            .and(&g.bias)
            .and(&mut m.bias)
            .and(&mut v.bias)
            .for_each(update);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{init_model, ModelConfig};
    use super::*;

    fn setup() -> (Mlp, TrainConfig) {
        let cfg = ModelConfig::new(3, vec![4, 4], 2).unwrap();
        (init_model(&cfg, 5).unwrap(), TrainConfig::default())
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let (mut model, cfg) = setup();
        let before = model.clone();
        let mut state = AdamState::new(&model);
        adam_step(
            &mut model,
            &Gradients::zeros_like(&before),
            &mut state,
            &cfg,
        )
        .unwrap();
        assert_eq!(model, before);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let (mut model, cfg) = setup();
        let before = model.clone();
        let mut grads = Gradients::zeros_like(&model);
        for (i, l) in grads.layers.iter_mut().enumerate() {
            l.weights.fill(0.3 * (i as f64 + 1.0));
            l.bias.fill(-2.0);
        }
        let mut state = AdamState::new(&model);
        adam_step(&mut model, &grads, &mut state, &cfg).unwrap();
        for ((a, b), g) in model
            .layers()
            .iter()
            .zip(before.layers())
            .zip(&grads.layers)
        {
            for ((x, y), gv) in a.weights.iter().zip(b.weights.iter()).zip(g.weights.iter()) {
                let delta = y - x;
                assert!((delta.abs() - cfg.learning_rate).abs() < 1e-10);
                assert_eq!(delta.signum(), gv.signum());
            }
            for (x, y) in a.bias.iter().zip(b.bias.iter()) {
                assert!((x - y - cfg.learning_rate).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn deterministic_and_shape_checked() {
        let (model, cfg) = setup();
        let mut grads = Gradients::zeros_like(&model);
        grads.layers[0].weights.fill(0.1);
        let (mut a, mut b) = (model.clone(), model.clone());
        let (mut sa, mut sb) = (AdamState::new(&model), AdamState::new(&model));
        for _ in 0..3 {
            adam_step(&mut a, &grads, &mut sa, &cfg).unwrap();
            adam_step(&mut b, &grads, &mut sb, &cfg).unwrap();
        }
        assert_eq!(a, b);
        assert_eq!(sa, sb);

        let other = init_model(&ModelConfig::new(3, vec![5], 2).unwrap(), 0).unwrap();
        let mut s = AdamState::new(&model);
        assert!(adam_step(&mut a, &Gradients::zeros_like(&other), &mut s, &cfg).is_err());
    }
}
