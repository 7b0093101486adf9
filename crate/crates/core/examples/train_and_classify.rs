//! Trains on basic motions of one fold, then labels combined-motion test
//! frames with the KL basis rule. Saves and reloads the model on the way.
//!
//! ```text
//! cargo run --release --example train_and_classify -- 0
//! ```
//! The argument is the synthesis layer.

use emgmix::classifier::{build_basis, classify_patterns};
use emgmix::dataset::MotionVocabulary;
use emgmix::harness::{ExperimentConfig, Method, Metrics, PreparedSession};
use emgmix::mixer::SynthesisConfig;
use emgmix::network::{load_checkpoint, save_checkpoint};
use emgmix::simulator::{default_spec, Simulator};

fn main() -> emgmix::Result<()> {
    let layer: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(0);
    let vocab = MotionVocabulary::upper_limb();
    let mut spec = default_spec(&vocab, 9);
    spec.sample_rate = 500.0;
    spec.emg_band = (20.0, 200.0);
    let config = ExperimentConfig {
        synthesis: SynthesisConfig {
            layer,
            ..SynthesisConfig::default()
        },
        ..ExperimentConfig::default()
    };
    let prepared = PreparedSession::new(Simulator::new(spec)?.simulate()?, &config.pipeline)?;
    let (fold_index, fold) = prepared.folds(&config)?.remove(0);
    println!("fold {fold_index}: train trials {:?}", fold.train_trials);

    for method in [Method::BasicOnly, Method::Proposed] {
        let data = prepared.fold_data(method, &fold)?;
        let (model, history) = prepared.train_model(method, &data, &config, fold_index, 0)?;
        println!(
            "{}: {} training frames, loss {:.3} -> {:.3}",
            method.name(),
            data.train.len(),
            history[0],
            history[history.len() - 1]
        );

        let path = std::env::temp_dir().join(format!("emgmix-{}.json", method.name()));
        save_checkpoint(&model, &path)?;
        let model = load_checkpoint(&path)?;

        let pred = classify_patterns(&model, &data.test, &build_basis(&vocab))?;
        let truth: Vec<usize> = data.test.iter().map(|p| p.motion).collect();
        let m = Metrics::from_predictions(&vocab, &truth, &pred, fold_index, 0)?;
        println!(
            "  basic {:.3}  combined {:.3}  overall {:.3}",
            m.basic_accuracy.unwrap_or(f64::NAN),
            m.combined_accuracy.unwrap_or(f64::NAN),
            m.overall_accuracy.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
