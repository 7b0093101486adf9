//! Proposed vs basic-only vs fully-supervised over trial folds.
//!
//! ```text
//! cargo run --release --example compare_methods -- target/compare 3
//! ```
//! The second argument limits the number of folds (all 15 when omitted).

use std::path::PathBuf;

use emgmix::dataset::MotionVocabulary;
use emgmix::harness::{compare, write_compare_bundle, ExperimentConfig, Method, PreparedSession};
use emgmix::simulator::{default_spec, Simulator};

fn main() -> emgmix::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/compare".into()));
    let n_folds: Option<usize> = args.next().and_then(|a| a.parse().ok());

    let mut spec = default_spec(&MotionVocabulary::upper_limb(), 2024);
    spec.sample_rate = 500.0;
    spec.emg_band = (20.0, 200.0);
    let config = ExperimentConfig {
        folds: n_folds.map(|n| (0..n).collect()),
        ..ExperimentConfig::default()
    };
    let prepared = PreparedSession::new(Simulator::new(spec)?.simulate()?, &config.pipeline)?;
    let results = compare(&prepared, &config, &Method::ALL)?;

    println!(
        "{:<18}{:>16}{:>16}{:>16}",
        "method", "basic", "combined", "overall"
    );
    for r in &results {
        let cell = |s: Option<emgmix::harness::Stat>| {
            s.map_or("-".to_string(), |s| format!("{:.3} ± {:.3}", s.mean, s.std))
        };
        println!(
            "{:<18}{:>16}{:>16}{:>16}",
            r.method.name(),
            cell(r.summary.basic_accuracy),
            cell(r.summary.combined_accuracy),
            cell(r.summary.overall_accuracy)
        );
    }
    write_compare_bundle(&out, &prepared, &results)?;
    println!("summary.json and confusion CSVs in {}", out.display());
    Ok(())
}
