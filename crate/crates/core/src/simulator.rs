//! Seeded multichannel EMG generator with known ground truth.
//!
//! Each basic motion activates the electrode ring with a fixed envelope
//! vector. A combined motion activates `c * sum(a_k)` plus an optional
//! co-contraction term `gamma * geometric_mean(a_k)`. Every channel carries
//! band-limited Gaussian noise modulated by its amplitude, plus power-line
//! interference and white baseline noise.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{MotionVocabulary, Recording, Session, VocabularyDef};
use crate::error::{Error, Result};
use crate::seed::rng_for;
use crate::signal::{design_highpass, design_lowpass, BiquadCascade};

pub const DEFAULT_CHANNELS: usize = 8;
const BUMP_WIDTH: f64 = 1.2;
const CARRIER_WARMUP_S: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulatorSpec {
    pub subject: String,
    pub vocabulary: VocabularyDef,
    /// One activation vector per basic motion, one entry per electrode.
    pub envelopes: Vec<Vec<f64>>,
    pub duration_s: f64,
    pub sample_rate: f64,
    pub trials: usize,
    pub emg_band: (f64, f64),
    pub interference_hz: f64,
    pub interference_amp: f64,
    pub baseline_noise: f64,
    pub combine_gain: f64,
    pub cocontraction_gamma: f64,
    pub trial_jitter: f64,
    pub seed: u64,
}

/// Circular Gaussian bumps spread evenly around a ring of `n_channels` electrodes.
pub fn ring_envelopes(n_basic: usize, n_channels: usize) -> Vec<Vec<f64>> {
    (0..n_basic)
        .map(|m| {
            let center = n_channels * m / n_basic.max(1);
            (0..n_channels)
                .map(|d| {
                    let gap = d.abs_diff(center);
                    let dist = gap.min(n_channels - gap) as f64;
                    (-dist * dist / (2.0 * BUMP_WIDTH * BUMP_WIDTH)).exp()
                })
                .collect()
        })
        .collect()
}

pub fn default_spec(vocab: &MotionVocabulary, seed: u64) -> SimulatorSpec {
    default_spec_with_channels(vocab, DEFAULT_CHANNELS, seed)
}

pub fn default_spec_with_channels(
    vocab: &MotionVocabulary,
    n_channels: usize,
    seed: u64,
) -> SimulatorSpec {
    let envelopes = ring_envelopes(vocab.n_basic(), n_channels);
    let total: f64 = envelopes.iter().flatten().sum();
    let count = envelopes.iter().map(Vec::len).sum::<usize>().max(1);
    SimulatorSpec {
        subject: "sim01".into(),
        vocabulary: vocab.to_def(),
        envelopes,
        duration_s: 4.0,
        sample_rate: 2000.0,
        trials: 6,
        emg_band: (20.0, 450.0),
        interference_hz: 60.0,
        interference_amp: 0.2 * total / count as f64,
        baseline_noise: 0.02,
        combine_gain: 0.6,
        cocontraction_gamma: 0.0,
        trial_jitter: 0.1,
        seed,
    }
}

/// A validated spec with its carrier filter designed.
#[derive(Debug, Clone)]
pub struct Simulator {
    spec: SimulatorSpec,
    vocab: MotionVocabulary,
    carrier: BiquadCascade,
    carrier_scale: f64,
}

impl Simulator {
    pub fn new(spec: SimulatorSpec) -> Result<Self> {
        let vocab = MotionVocabulary::from_def(&spec.vocabulary)?;
        if spec.envelopes.len() != vocab.n_basic() {
            return Err(Error::Simulator(format!(
                "{} envelopes for {} basic motions",
                spec.envelopes.len(),
                vocab.n_basic()
            )));
        }
        let d = spec.envelopes.first().map_or(0, Vec::len);
        if d == 0 || spec.envelopes.iter().any(|e| e.len() != d) {
            return Err(Error::Simulator(
                "envelopes must share a nonzero length".into(),
            ));
        }
        for (m, e) in spec.envelopes.iter().enumerate() {
            if e.iter().any(|&a| a.is_nan() || a < 0.0 || !a.is_finite()) {
                return Err(Error::Simulator(format!(
                    "envelope {m} has a negative amplitude"
                )));
            }
            if !e.iter().any(|&a| a > 0.0) {
                return Err(Error::Simulator(format!("envelope {m} is all zero")));
            }
        }
        let nonneg = [
            ("interference_amp", spec.interference_amp),
            ("baseline_noise", spec.baseline_noise),
            ("combine_gain", spec.combine_gain),
            ("cocontraction_gamma", spec.cocontraction_gamma),
            ("trial_jitter", spec.trial_jitter),
        ];
        for (name, v) in nonneg {
            if v.is_nan() || v < 0.0 {
                return Err(Error::Simulator(format!("{name} must be >= 0")));
            }
        }
        if spec.sample_rate.is_nan()
            || spec.sample_rate <= 0.0
            || (spec.duration_s * spec.sample_rate).is_nan()
            || spec.duration_s * spec.sample_rate < 1.0
        {
            return Err(Error::Simulator(
                "duration x rate must cover at least one sample".into(),
            ));
        }
        if spec.trials == 0 {
            return Err(Error::Simulator("need at least one trial".into()));
        }
        let nyquist = spec.sample_rate / 2.0;
        let (low, high) = spec.emg_band;
        if !(low > 0.0 && low < high && low < nyquist) {
            return Err(Error::Simulator(format!(
                "invalid EMG band ({low}, {high}) Hz"
            )));
        }
        let mut carrier = design_highpass(low, 2, spec.sample_rate)?;
        if high < nyquist {
            carrier
                .sections
                .extend(design_lowpass(high, 4, spec.sample_rate)?.sections);
        }
        let band = high.min(nyquist) - low;
        let carrier_scale = (spec.sample_rate / (2.0 * band)).sqrt();
        Ok(Self {
            spec,
            vocab,
            carrier,
            carrier_scale,
        })
    }

    pub fn spec(&self) -> &SimulatorSpec {
        &self.spec
    }

    pub fn vocab(&self) -> &MotionVocabulary {
        &self.vocab
    }

    pub fn n_channels(&self) -> usize {
        self.spec.envelopes[0].len()
    }

    pub fn n_samples(&self) -> usize {
        (self.spec.duration_s * self.spec.sample_rate).round() as usize
    }

    /// Noise-free activation vector `A` for a motion.
    pub fn amplitude(&self, motion: usize) -> Result<Vec<f64>> {
        let label = self
            .vocab
            .label(motion)
            .ok_or_else(|| Error::Simulator(format!("unknown motion id {motion}")))?;
        if label.is_basic() {
            return Ok(self.spec.envelopes[motion].clone());
        }
        let k = label.constituents.len() as f64;
        let c = self.spec.combine_gain;
        let gamma = self.spec.cocontraction_gamma;
        Ok((0..self.n_channels())
            .map(|d| {
                let parts = label
                    .constituents
                    .iter()
                    .map(|&b| self.spec.envelopes[b][d]);
                let linear: f64 = parts.clone().sum::<f64>() * c;
                let geo = parts.map(f64::ln).sum::<f64>() / k;
                linear + gamma * geo.exp()
            })
            .collect())
    }

    /// Deterministic in `(seed, motion, trial)`; `trial` is 0-based.
    pub fn simulate_recording(&self, motion: usize, trial: usize) -> Result<Recording> {
        let amplitude = self.amplitude(motion)?;
        let spec = &self.spec;
        let mut rng = rng_for(spec.seed, &[motion as u64, trial as u64]);
        let n = self.n_samples();
        let d = self.n_channels();
        let fs = spec.sample_rate;

        let gains: Vec<f64> = amplitude
            .iter()
            .map(|a| {
                let j: f64 = rng.sample(StandardNormal);
                a * (1.0 + spec.trial_jitter * j).max(0.0)
            })
            .collect();
        let phase = rng.random::<f64>() * 2.0 * PI;

        let warm = (CARRIER_WARMUP_S * fs).round() as usize;
        let mut samples = Array2::zeros((n, d));
        let mut carrier = vec![0.0; n + warm];
        for (ch, gain) in gains.iter().enumerate() {
            carrier
                .iter_mut()
                .for_each(|v| *v = rng.sample(StandardNormal));
            self.carrier.filter_in_place(&mut carrier);
            let scale = gain * self.carrier_scale;
            for (dst, c) in samples.column_mut(ch).iter_mut().zip(&carrier[warm..]) {
                *dst = scale * c;
            }
        }
        let omega = 2.0 * PI * spec.interference_hz / fs;
        for (i, mut row) in samples.rows_mut().into_iter().enumerate() {
            let hum = spec.interference_amp * (omega * i as f64 + phase).sin();
            for v in row.iter_mut() {
                let w: f64 = rng.sample(StandardNormal);
                *v += hum + spec.baseline_noise * w;
            }
        }
        Ok(Recording {
            subject: spec.subject.clone(),
            trial,
            motion,
            sample_rate: fs,
            samples,
        })
    }

    /// Every motion for every trial, motion-major.
    pub fn simulate(&self) -> Result<Session> {
        let mut recordings = Vec::with_capacity(self.vocab.len() * self.spec.trials);
        for motion in 0..self.vocab.len() {
            for trial in 0..self.spec.trials {
                recordings.push(self.simulate_recording(motion, trial)?);
            }
        }
        Session::new(self.spec.subject.clone(), self.vocab.clone(), recordings)
    }
}

/// Writes `manifest.json`, `simulator.json` and one CSV per recording.
pub fn simulate_session(spec: &SimulatorSpec, out_dir: &Path) -> Result<PathBuf> {
    let sim = Simulator::new(spec.clone())?;
    let session = sim.simulate()?;
    let manifest = session.save(out_dir)?;
    let spec_path = out_dir.join("simulator.json");
    let text = serde_json::to_string_pretty(spec).expect("spec serializes");
    fs::write(&spec_path, text + "\n").map_err(|e| Error::io(&spec_path, e))?;
    Ok(manifest)
}
