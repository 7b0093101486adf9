#![allow(dead_code)]

use emgmix::dataset::MotionVocabulary;
use emgmix::harness::PreparedSession;
use emgmix::network::{composite_loss, init_model, Batch, Mlp, ModelConfig};
use emgmix::signal::PipelineConfig;
use emgmix::simulator::{default_spec, Simulator, SimulatorSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-5;

/// D=4, hidden [5,5,5], 3 outputs, with random nonzero biases.
pub fn toy_model(seed: u64) -> Mlp {
    let cfg = ModelConfig::new(4, vec![5, 5, 5], 3).unwrap();
    let mut model = init_model(&cfg, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb1a5);
    for layer in model.layers_mut() {
        layer.bias.mapv_inplace(|_| rng.random_range(-0.3..0.3));
    }
    model
}

fn random_simplex(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

/// Smallest |preactivation| over the ReLU units a row passes through when it
/// enters at `layer`. Central differences are only valid away from these kinks.
fn kink_margin(model: &Mlp, layer: usize, row: &[f64]) -> f64 {
    let layers = model.layers();
    let mut act = row.to_vec();
    let mut margin = f64::INFINITY;
    for l in &layers[layer..layers.len() - 1] {
        let pre: Vec<f64> = l
            .weights
            .rows()
            .into_iter()
            .zip(&l.bias)
            .map(|(w, b)| w.iter().zip(&act).map(|(a, x)| a * x).sum::<f64>() + b)
            .collect();
        margin = pre.iter().fold(margin, |m, v| m.min(v.abs()));
        act = pre.iter().map(|v| v.max(0.0)).collect();
    }
    margin
}

const KINK_MARGIN: f64 = 1e-3;

fn clear_row(
    model: &Mlp,
    layer: usize,
    rng: &mut ChaCha8Rng,
    draw: impl Fn(&mut ChaCha8Rng) -> Vec<f64>,
) -> Vec<f64> {
    loop {
        let row = draw(rng);
        if kink_margin(model, layer, &row) > KINK_MARGIN {
            return row;
        }
    }
}

/// A one-hot basic batch at the input and a soft-label batch entering at `layer`.
/// Rows are redrawn until no hidden unit sits within 1e-3 of its kink.
pub fn toy_batches(model: &Mlp, layer: usize, seed: u64) -> (Batch, Batch) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = model.config();
    let k = cfg.output_dim;
    let n_basic = 7;
    let d = cfg.input_dim;
    let inputs: Vec<Vec<f64>> = (0..n_basic)
        .map(|_| clear_row(model, 0, &mut rng, |r| random_simplex(r, d)))
        .collect();
    let targets: Vec<Vec<f64>> = (0..n_basic)
        .map(|i| (0..k).map(|j| f64::from(u8::from(j == i % k))).collect())
        .collect();
    let basic = Batch::from_rows(&inputs, &targets).unwrap();

    let width = cfg.width(layer).unwrap();
    let n_synth = 5;
    let z: Vec<Vec<f64>> = (0..n_synth)
        .map(|_| {
            clear_row(model, layer, &mut rng, |r| {
                if layer == 0 {
                    random_simplex(r, width)
                } else {
                    (0..width).map(|_| r.random::<f64>()).collect()
                }
            })
        })
        .collect();
    let soft: Vec<Vec<f64>> = (0..n_synth)
        .map(|i| {
            let l = rng.random::<f64>();
            let mut t = vec![0.0; k];
            t[i % k] += l;
            t[(i + 1) % k] += 1.0 - l;
            t
        })
        .collect();
    (basic, Batch::from_rows(&z, &soft).unwrap())
}

/// Largest relative error between analytic and central-difference gradients,
/// with the denominator floored at 1e-6.
pub fn max_gradient_error(model: &Mlp, basic: &Batch, synth: &Batch, layer: usize) -> f64 {
    let (_, grads) = model.backward(basic, synth, layer).unwrap();
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    let loss = |m: &Mlp| composite_loss(m, basic, synth, layer).unwrap();
    let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-6);
    for (li, g) in grads.layers.iter().enumerate() {
        for (idx, &analytic) in g.weights.indexed_iter() {
            let orig = probe.layers()[li].weights[idx];
            probe.layers_mut()[li].weights[idx] = orig + FD_STEP;
            let up = loss(&probe);
            probe.layers_mut()[li].weights[idx] = orig - FD_STEP;
            let down = loss(&probe);
            probe.layers_mut()[li].weights[idx] = orig;
            worst = worst.max(rel(analytic, (up - down) / (2.0 * FD_STEP)));
        }
        for (j, &analytic) in g.bias.iter().enumerate() {
            let orig = probe.layers()[li].bias[j];
            probe.layers_mut()[li].bias[j] = orig + FD_STEP;
            let up = loss(&probe);
            probe.layers_mut()[li].bias[j] = orig - FD_STEP;
            let down = loss(&probe);
            probe.layers_mut()[li].bias[j] = orig;
            worst = worst.max(rel(analytic, (up - down) / (2.0 * FD_STEP)));
        }
    }
    worst
}

/// Kolmogorov-Smirnov distance of a sample to Uniform[0, 1].
pub fn ks_uniform(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).max((i + 1) as f64 / n - x))
        .fold(0.0, f64::max)
}

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (mean, xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n)
}

/// Standard simulated subject (6 basic + 12 combined, D = 8, 6 trials)
/// at 500 Hz with a 20-200 Hz carrier.
pub fn desk_spec(seed: u64) -> SimulatorSpec {
    let mut spec = default_spec(&MotionVocabulary::upper_limb(), seed);
    spec.sample_rate = 500.0;
    spec.emg_band = (20.0, 200.0);
    spec
}

/// A smaller session for tests that only need the plumbing.
pub fn small_spec(seed: u64) -> SimulatorSpec {
    let mut spec = desk_spec(seed);
    spec.duration_s = 1.5;
    spec.trials = 3;
    spec
}

pub fn prepare(spec: SimulatorSpec) -> PreparedSession {
    let session = Simulator::new(spec).unwrap().simulate().unwrap();
    PreparedSession::new(session, &PipelineConfig::default()).unwrap()
}
