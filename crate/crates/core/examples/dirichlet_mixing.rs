//! Mixing ratios and synthetic combined-motion samples.
//!
//! ```text
//! cargo run --release --example dirichlet_mixing
//! ```

use emgmix::dataset::{MotionVocabulary, Pattern};
use emgmix::mixer::{build_synthetic_set, mix_labels, sample_mixing_ratios, SynthesisConfig};
use emgmix::network::{init_model, ModelConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> emgmix::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for alpha in [0.5, 1.0, 10.0, 50.0, 1000.0] {
        let draws: Vec<f64> = (0..20_000)
            .map(|_| sample_mixing_ratios(alpha, 2, &mut rng).map(|l| l[0]))
            .collect::<emgmix::Result<_>>()?;
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / draws.len() as f64;
        println!(
            "alpha {alpha:>7}: mean {mean:.3}  var {var:.5}  (theory {:.5})",
            0.25 / (2.0 * alpha + 1.0)
        );
    }

    let e = |i: usize| -> Vec<f64> { (0..6).map(|j| f64::from(u8::from(i == j))).collect() };
    let lambda = sample_mixing_ratios(50.0, 2, &mut rng)?;
    println!(
        "soft label for S1+S5 with {lambda:.3?}: {:.3?}",
        mix_labels(&[&e(0), &e(4)], &lambda)?
    );

    // toy basic patterns: each motion dominates one channel
    let vocab = MotionVocabulary::upper_limb();
    let patterns: Vec<Pattern> = (0..6)
        .flat_map(|m| (0..50).map(move |i| (m, i)))
        .map(|(m, i)| {
            let mut x: Vec<f64> = (0..8).map(|_| rng.random::<f64>() * 0.1).collect();
            x[m] += 1.0;
            let s: f64 = x.iter().sum();
            Pattern {
                x: x.iter().map(|v| v / s).collect(),
                motion: m,
                trial: 0,
                frame_index: i,
            }
        })
        .collect();
    let model = init_model(&ModelConfig::new(8, vec![64, 64, 64], 6)?, 0)?;
    for layer in [0, 2] {
        let cfg = SynthesisConfig {
            layer,
            total_count: Some(24),
            ..SynthesisConfig::default()
        };
        let set = build_synthetic_set(&model, &patterns, &vocab, &cfg, &mut rng)?;
        let s = &set[0];
        println!(
            "layer {layer}: {} samples of width {}; first is {} from sources {:?}, lambda {:.3?}",
            set.len(),
            s.z.len(),
            vocab.name(s.combined_class),
            s.sources,
            s.lambda
        );
    }
    Ok(())
}
