mod common;

use common::{max_gradient_error, toy_batches, toy_model};
use emgmix::dataset::{MotionVocabulary, Pattern};
use emgmix::mixer::SynthesisConfig;
use emgmix::network::{init_model, train, Batch, ModelConfig, TrainConfig};
use emgmix::signal::{fit_normalization, preprocess, PipelineConfig};
use emgmix::simulator::Simulator;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn gradients_match_finite_differences() {
    for seed in 0..6 {
        let model = toy_model(seed);
        for layer in 0..=3 {
            let (basic, synth) = toy_batches(&model, layer, 100 + seed);
            let err = max_gradient_error(&model, &basic, &synth, layer);
            assert!(
                err < 1e-4,
                "seed {seed} layer {layer}: relative error {err}"
            );
        }
    }
}

#[test]
fn synthetic_branch_stops_at_its_layer() {
    let model = toy_model(3);
    let (_, synth) = toy_batches(&model, 3, 9);
    let empty = Batch::empty(4, 3);
    let (_, grads) = model.backward(&empty, &synth, 3).unwrap();
    for g in &grads.layers[..3] {
        assert!(g.weights.iter().chain(g.bias.iter()).all(|&v| v == 0.0));
    }
    assert!(grads.layers[3].weights.iter().any(|&v| v != 0.0));
}

#[test]
fn composition_identity_and_normalization() {
    let model = init_model(&ModelConfig::new(8, vec![64, 64, 64], 6).unwrap(), 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let x: Vec<f64> = (0..8).map(|_| rng.random::<f64>()).collect();
        let full = model.forward(&x).unwrap();
        assert!((full.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for n in 0..=3 {
            let z = model.forward_to(n, &x).unwrap();
            let y = model.forward_from(n, &z).unwrap();
            for (a, b) in y.iter().zip(&full) {
                assert!((a - b).abs() < 1e-12);
            }
            let width = model.config().width(n).unwrap();
            let rz: Vec<f64> = (0..width).map(|_| rng.random::<f64>() * 2.0).collect();
            let out = model.forward_from(n, &rz).unwrap();
            assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

fn basic_patterns(seed: u64) -> (MotionVocabulary, Vec<Pattern>) {
    let mut spec = common::desk_spec(seed);
    spec.baseline_noise = 0.0;
    spec.interference_amp = 0.0;
    spec.trials = 1;
    spec.duration_s = 2.0;
    let sim = Simulator::new(spec).unwrap();
    let vocab = sim.vocab().clone();
    let recs: Vec<_> = (0..vocab.n_basic())
        .map(|m| sim.simulate_recording(m, 0).unwrap())
        .collect();
    let cfg = PipelineConfig::default();
    let refs: Vec<_> = recs.iter().collect();
    let params = fit_normalization(&refs, &cfg).unwrap();
    let patterns = recs
        .iter()
        .flat_map(|r| preprocess(r, &params, &cfg).unwrap())
        .collect();
    (vocab, patterns)
}

fn quick_train() -> TrainConfig {
    TrainConfig {
        epochs: 4,
        learning_rate: 1e-3,
        seed: 21,
        ..TrainConfig::default()
    }
}

#[test]
fn training_is_deterministic_and_reduces_loss() {
    let (vocab, patterns) = basic_patterns(2);
    let cfg = ModelConfig::new(8, vec![16, 16, 16], 6).unwrap();
    let synth = SynthesisConfig {
        layer: 2,
        ..SynthesisConfig::default()
    };
    let run = || {
        let mut model = init_model(&cfg, 8).unwrap();
        let history = train(&mut model, &patterns, &vocab, Some(&synth), &quick_train()).unwrap();
        (model, history)
    };
    let (m1, h1) = run();
    let (m2, h2) = run();
    assert_eq!(h1, h2);
    assert_eq!(m1, m2);
    assert_eq!(h1.len(), 4);
    assert!(h1[3] < h1[0], "{h1:?}");
}

#[test]
fn zero_synthetic_count_is_plain_training() {
    let (vocab, patterns) = basic_patterns(6);
    let cfg = ModelConfig::new(8, vec![16, 16, 16], 6).unwrap();
    let none = SynthesisConfig {
        total_count: Some(0),
        ..SynthesisConfig::default()
    };
    let mut a = init_model(&cfg, 1).unwrap();
    let mut b = a.clone();
    let ha = train(&mut a, &patterns, &vocab, Some(&none), &quick_train()).unwrap();
    let hb = train(&mut b, &patterns, &vocab, None, &quick_train()).unwrap();
    assert_eq!(ha, hb);
    assert_eq!(a, b);
}
