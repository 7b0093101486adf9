//! Generates a synthetic subject and writes it as a session directory.
//!
//! ```text
//! cargo run --release --example simulate_session -- out/session 0.0
//! ```
//! The optional second argument is the co-contraction strength.

use std::path::PathBuf;

use emgmix::dataset::{load_session, MotionVocabulary};
use emgmix::simulator::{default_spec, simulate_session, Simulator};

fn main() -> emgmix::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(
        args.next()
            .unwrap_or_else(|| "target/example-session".into()),
    );
    let gamma: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0.0);

    let vocab = MotionVocabulary::upper_limb();
    let mut spec = default_spec(&vocab, 1);
    spec.cocontraction_gamma = gamma;

    let sim = Simulator::new(spec.clone())?;
    for label in vocab.labels().iter().take(8) {
        let a = sim.amplitude(label.id)?;
        let cells: Vec<String> = a.iter().map(|v| format!("{v:.2}")).collect();
        println!("{:>3}  {}", label.name, cells.join(" "));
    }

    let manifest = simulate_session(&spec, &out)?;
    let session = load_session(&manifest)?;
    println!(
        "{} recordings, {} trials, {} channels at {} Hz -> {}",
        session.recordings.len(),
        session.n_trials(),
        session.n_channels,
        session.sample_rate,
        manifest.display()
    );
    Ok(())
}
