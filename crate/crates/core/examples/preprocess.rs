//! Turns raw recordings into simplex patterns and writes them to CSV.
//!
//! ```text
//! cargo run --release --example preprocess -- target/patterns.csv
//! ```

use std::path::PathBuf;

use emgmix::dataset::{FoldSpec, MotionVocabulary};
use emgmix::signal::{fit_normalization, preprocess, write_patterns_csv, PipelineConfig};
use emgmix::simulator::{default_spec, Simulator};

fn main() -> emgmix::Result<()> {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "target/patterns.csv".into()),
    );
    let vocab = MotionVocabulary::upper_limb();
    let session = Simulator::new(default_spec(&vocab, 4))?.simulate()?;
    let cfg = PipelineConfig::default();

    // normalization comes from basic motions of the training trials only
    let fold = FoldSpec::new(session.n_trials(), [0, 1])?;
    let train: Vec<_> = session
        .recordings
        .iter()
        .filter(|r| vocab.is_basic(r.motion) && fold.train_trials.contains(&r.trial))
        .collect();
    let params = fit_normalization(&train, &cfg)?;
    println!("channel maxima: {:.3?}", params.channel_max);

    let mut patterns = Vec::new();
    for rec in session.recordings.iter().filter(|r| r.trial == 2) {
        patterns.extend(preprocess(rec, &params, &cfg)?);
    }
    let worst = patterns
        .iter()
        .map(|p| (p.x.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    println!(
        "{} patterns from trial 3, max |sum - 1| = {worst:.1e}",
        patterns.len()
    );
    write_patterns_csv(&out, &patterns, &vocab)?;
    println!("wrote {}", out.display());
    Ok(())
}
