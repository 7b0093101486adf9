//! Designs the preprocessing filters and prints their responses.
//!
//! ```text
//! cargo run --example filter_design -- 2000
//! ```

use emgmix::signal::{design_bandstop, design_lowpass, PipelineConfig};

fn main() -> emgmix::Result<()> {
    let fs: f64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(2000.0);
    let cfg = PipelineConfig::default();
    let bandstop = design_bandstop(cfg.bandstop_low, cfg.bandstop_high, cfg.bandstop_order, fs)?;
    let lowpass = design_lowpass(cfg.lowpass_cutoff, cfg.lowpass_order, fs)?;

    println!(
        "band-stop {}-{} Hz, order {} at {fs} Hz",
        cfg.bandstop_low,
        cfg.bandstop_high,
        bandstop.order()
    );
    for f in [10.0, 50.0, 59.0, 60.0, 61.0, 62.0, 63.0, 70.0, 200.0] {
        println!("  {f:>6.1} Hz  {:>8.2} dB", bandstop.magnitude_db(f));
    }
    println!(
        "low-pass {} Hz, order {}",
        cfg.lowpass_cutoff,
        lowpass.order()
    );
    for f in [0.5, 1.0, 2.0, 4.0, 10.0, 20.0, 50.0] {
        let analog =
            -10.0 * (1.0 + (f / cfg.lowpass_cutoff).powi(2 * cfg.lowpass_order as i32)).log10();
        println!(
            "  {f:>6.1} Hz  {:>8.2} dB  (analog {analog:.2})",
            lowpass.magnitude_db(f)
        );
    }

    let n = fs as usize * 2;
    let hum: Vec<f64> = (0..n)
        .map(|i| (2.0 * std::f64::consts::PI * 61.0 * i as f64 / fs).sin())
        .collect();
    let out = bandstop.filter(&hum);
    let rms = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
    println!(
        "61 Hz tone, steady state: {:.1} dB",
        20.0 * (rms(&out[n / 2..]) / rms(&hum[n / 2..])).log10()
    );
    println!("stable: {} / {}", bandstop.is_stable(), lowpass.is_stable());
    Ok(())
}
