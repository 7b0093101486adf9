//! Accuracy of the proposed method as the synthesis layer moves deeper.
//!
//! ```text
//! cargo run --release --example layer_sweep -- 3
//! ```
//! The argument limits the number of folds.

use emgmix::dataset::MotionVocabulary;
use emgmix::harness::{layer_sweep, write_layer_sweep_csv, ExperimentConfig, PreparedSession};
use emgmix::simulator::{default_spec, Simulator};

fn main() -> emgmix::Result<()> {
    let n_folds: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(3);
    let mut spec = default_spec(&MotionVocabulary::upper_limb(), 2024);
    spec.sample_rate = 500.0;
    spec.emg_band = (20.0, 200.0);
    let config = ExperimentConfig {
        folds: Some((0..n_folds).collect()),
        ..ExperimentConfig::default()
    };
    let prepared = PreparedSession::new(Simulator::new(spec)?.simulate()?, &config.pipeline)?;
    let points = layer_sweep(&prepared, &config, &[0, 1, 2, 3])?;
    for p in &points {
        let bar = "#".repeat((p.overall.mean * 50.0).round() as usize);
        println!(
            "n={} {:.3} ± {:.3} {bar}",
            p.layer, p.overall.mean, p.overall.std
        );
    }
    let path = std::env::temp_dir().join("layer_sweep.csv");
    write_layer_sweep_csv(&path, &points)?;
    println!("wrote {}", path.display());
    Ok(())
}
