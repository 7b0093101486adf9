//! Averaged actual vs synthetic patterns and a joint PCA projection per
//! combined motion, written as plot-ready CSV.
//!
//! ```text
//! cargo run --release --example pattern_report -- target/report
//! ```

use std::path::PathBuf;

use emgmix::dataset::MotionVocabulary;
use emgmix::harness::{
    average_pattern, pca_project, write_pattern_report, ExperimentConfig, Method, PreparedSession,
};
use emgmix::mixer::{build_synthetic_set, SynthesisConfig};
use emgmix::network::init_model;
use emgmix::simulator::{default_spec, Simulator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> emgmix::Result<()> {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "target/report".into()),
    );
    let vocab = MotionVocabulary::upper_limb();
    let mut spec = default_spec(&vocab, 5);
    spec.sample_rate = 500.0;
    spec.emg_band = (20.0, 200.0);
    let config = ExperimentConfig::default();
    let prepared = PreparedSession::new(Simulator::new(spec)?.simulate()?, &config.pipeline)?;

    // the same numbers the report writes, for one motion
    let (_, fold) = prepared.folds(&config)?.remove(0);
    let data = prepared.fold_data(Method::Proposed, &fold)?;
    let model = init_model(&prepared.model_config(Method::Proposed, &config)?, 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let synthetic = build_synthetic_set(
        &model,
        &data.train,
        &vocab,
        &SynthesisConfig::default(),
        &mut rng,
    )?;
    let c1 = vocab.id("C1").expect("C1 exists");
    let actual: Vec<Vec<f64>> = data
        .test
        .iter()
        .filter(|p| p.motion == c1)
        .map(|p| p.x.clone())
        .collect();
    let synth: Vec<Vec<f64>> = synthetic
        .iter()
        .filter(|s| s.combined_class == c1)
        .map(|s| s.z.clone())
        .collect();
    let avg = |v: &[Vec<f64>]| average_pattern(&v.iter().map(Vec::as_slice).collect::<Vec<_>>());
    println!("C1 actual    {:.3?}", avg(&actual)?);
    println!("C1 synthetic {:.3?}", avg(&synth)?);
    let pca = pca_project(&actual, &synth)?;
    println!(
        "explained variance of the first two components: {:.3?}",
        &pca.explained_variance[..2]
    );

    write_pattern_report(&out, &prepared, &config)?;
    println!(
        "radar_*.csv, pca_*.csv and synthetic_patterns.csv in {}",
        out.display()
    );
    Ok(())
}
