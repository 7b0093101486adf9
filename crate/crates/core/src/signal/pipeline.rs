use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::filter::{design_bandstop, design_lowpass, BiquadCascade};
use crate::dataset::{MotionVocabulary, Pattern, Recording};
use crate::error::{Error, Result};

/// Maximum fraction of frames that may be dropped for having no activity.
const MAX_DROPPED_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub bandstop_low: f64,
    pub bandstop_high: f64,
    pub bandstop_order: usize,
    pub lowpass_cutoff: f64,
    pub lowpass_order: usize,
    pub trim_fraction: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            bandstop_low: 60.0,
            bandstop_high: 62.0,
            bandstop_order: 4,
            lowpass_cutoff: 2.0,
            lowpass_order: 2,
            trim_fraction: 0.05,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self, field: &str) -> Result<()> {
        if !(self.trim_fraction >= 0.0 && self.trim_fraction < 1.0) {
            return Err(Error::config(
                format!("{field}.trim_fraction"),
                "must lie in [0, 1)",
            ));
        }
        if !(self.bandstop_low > 0.0 && self.bandstop_low < self.bandstop_high) {
            return Err(Error::config(
                format!("{field}.bandstop_low"),
                "must satisfy 0 < bandstop_low < bandstop_high",
            ));
        }
        if self.bandstop_order == 0 || !self.bandstop_order.is_multiple_of(2) {
            return Err(Error::config(
                format!("{field}.bandstop_order"),
                "must be even and > 0",
            ));
        }
        if self.lowpass_cutoff.is_nan() || self.lowpass_cutoff <= 0.0 {
            return Err(Error::config(
                format!("{field}.lowpass_cutoff"),
                "must be > 0",
            ));
        }
        if self.lowpass_order == 0 {
            return Err(Error::config(
                format!("{field}.lowpass_order"),
                "must be > 0",
            ));
        }
        Ok(())
    }

    /// Number of leading frames removed from an `n`-sample recording.
    pub fn trim_count(&self, n: usize) -> usize {
        ((n as f64) * self.trim_fraction).floor() as usize
    }
}

/// Smoothed, rectified, trimmed signal of one recording (`frames x channels`),
/// not yet normalized. Independent of the training fold.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub motion: usize,
    pub trial: usize,
    pub values: Array2<f64>,
}

/// Per-channel maxima of training envelopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub channel_max: Vec<f64>,
}

impl NormalizationParams {
    pub fn fit<'a>(envelopes: impl IntoIterator<Item = &'a Envelope>) -> Result<Self> {
        let mut channel_max: Option<Vec<f64>> = None;
        for env in envelopes {
            let acc =
                channel_max.get_or_insert_with(|| vec![f64::NEG_INFINITY; env.values.ncols()]);
            if acc.len() != env.values.ncols() {
                return Err(Error::DimensionMismatch {
                    expected: acc.len(),
                    actual: env.values.ncols(),
                });
            }
            for row in env.values.rows() {
                for (m, &v) in acc.iter_mut().zip(row.iter()) {
                    if v > *m {
                        *m = v;
                    }
                }
            }
        }
        let channel_max =
            channel_max.ok_or_else(|| Error::Signal("no training recordings".into()))?;
        if let Some(channel) = channel_max.iter().position(|&m| m.is_nan() || m <= 0.0) {
            return Err(Error::FlatChannel { channel });
        }
        Ok(Self { channel_max })
    }
}

/// The preprocessing chain with filters designed for one sample rate.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    config: PipelineConfig,
    bandstop: BiquadCascade,
    lowpass: BiquadCascade,
}

impl Preprocessor {
    pub fn new(config: &PipelineConfig, sample_rate: f64) -> Result<Self> {
        let bandstop = design_bandstop(
            config.bandstop_low,
            config.bandstop_high,
            config.bandstop_order,
            sample_rate,
        )?;
        let lowpass = design_lowpass(config.lowpass_cutoff, config.lowpass_order, sample_rate)?;
        if !(config.trim_fraction >= 0.0 && config.trim_fraction < 1.0) {
            return Err(Error::Signal(format!(
                "trim fraction {} outside [0, 1)",
                config.trim_fraction
            )));
        }
        Ok(Self {
            config: config.clone(),
            bandstop,
            lowpass,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn sample_rate(&self) -> f64 {
        self.bandstop.design_rate
    }

    pub fn bandstop(&self) -> &BiquadCascade {
        &self.bandstop
    }

    pub fn lowpass(&self) -> &BiquadCascade {
        &self.lowpass
    }

    /// Band-stop, rectify and smooth each channel, then drop the leading transient.
    pub fn envelope(&self, recording: &Recording) -> Result<Envelope> {
        if recording.sample_rate != self.sample_rate() {
            return Err(Error::Signal(format!(
                "recording sampled at {} Hz, filters designed for {} Hz",
                recording.sample_rate,
                self.sample_rate()
            )));
        }
        let n = recording.n_samples();
        if n == 0 {
            return Err(Error::Signal("empty recording".into()));
        }
        let skip = self.config.trim_count(n);
        let mut values = Array2::zeros((n - skip, recording.n_channels()));
        let mut buf = vec![0.0; n];
        for (d, column) in recording.samples.columns().into_iter().enumerate() {
            for (b, &v) in buf.iter_mut().zip(column.iter()) {
                *b = v;
            }
            self.bandstop.filter_in_place(&mut buf);
            buf.iter_mut().for_each(|v| *v = v.abs());
            self.lowpass.filter_in_place(&mut buf);
            for (dst, &v) in values.column_mut(d).iter_mut().zip(&buf[skip..]) {
                *dst = v;
            }
        }
        Ok(Envelope {
            motion: recording.motion,
            trial: recording.trial,
            values,
        })
    }

    pub fn preprocess(
        &self,
        recording: &Recording,
        params: &NormalizationParams,
    ) -> Result<Vec<Pattern>> {
        normalize(&self.envelope(recording)?, params)
    }
}

/// Clamp, divide by training maxima, then rescale every frame onto the simplex.
/// Frames with no remaining activity are dropped.
pub fn normalize(envelope: &Envelope, params: &NormalizationParams) -> Result<Vec<Pattern>> {
    let d = envelope.values.ncols();
    if params.channel_max.len() != d {
        return Err(Error::DimensionMismatch {
            expected: params.channel_max.len(),
            actual: d,
        });
    }
    let n = envelope.values.nrows();
    let mut patterns = Vec::with_capacity(n);
    for (frame_index, row) in envelope.values.rows().into_iter().enumerate() {
        let mut x: Vec<f64> = row
            .iter()
            .zip(&params.channel_max)
            .map(|(&v, &m)| v.max(0.0) / m)
            .collect();
        let sum: f64 = x.iter().sum();
        if sum.is_nan() || sum <= 0.0 || !sum.is_finite() {
            continue;
        }
        x.iter_mut().for_each(|v| *v /= sum);
        patterns.push(Pattern {
            x,
            motion: envelope.motion,
            trial: envelope.trial,
            frame_index,
        });
    }
    let dropped = n - patterns.len();
    if dropped as f64 > MAX_DROPPED_FRACTION * n as f64 {
        return Err(Error::Signal(format!(
            "{dropped} of {n} frames have no activity (motion {}, trial {})",
            envelope.motion,
            envelope.trial + 1
        )));
    }
    Ok(patterns)
}

pub fn fit_normalization(
    train_recordings: &[&Recording],
    config: &PipelineConfig,
) -> Result<NormalizationParams> {
    let first = train_recordings
        .first()
        .ok_or_else(|| Error::Signal("no training recordings".into()))?;
    let pre = Preprocessor::new(config, first.sample_rate)?;
    let envelopes = train_recordings
        .iter()
        .map(|r| pre.envelope(r))
        .collect::<Result<Vec<_>>>()?;
    NormalizationParams::fit(&envelopes)
}

pub fn preprocess(
    recording: &Recording,
    params: &NormalizationParams,
    config: &PipelineConfig,
) -> Result<Vec<Pattern>> {
    Preprocessor::new(config, recording.sample_rate)?.preprocess(recording, params)
}

/// Debug dump: `motion,trial,frame,x1..xD`, trials 1-based.
pub fn write_patterns_csv(
    path: &Path,
    patterns: &[Pattern],
    vocab: &MotionVocabulary,
) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let d = patterns.first().map_or(0, |p| p.x.len());
    let mut header = String::from("motion,trial,frame");
    for i in 1..=d {
        header.push_str(&format!(",x{i}"));
    }
    writeln!(out, "{header}").map_err(|e| Error::io(path, e))?;
    for p in patterns {
        let xs: Vec<String> = p.x.iter().map(f64::to_string).collect();
        writeln!(
            out,
            "{},{},{},{}",
            vocab.name(p.motion),
            p.trial + 1,
            p.frame_index,
            xs.join(",")
        )
        .map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn env(values: Array2<f64>) -> Envelope {
        Envelope {
            motion: 0,
            trial: 0,
            values,
        }
    }

    #[test]
    fn two_step_normalization_by_hand() {
        let params = NormalizationParams {
            channel_max: vec![2.0, 4.0],
        };
        let out = normalize(&env(array![[1.0, 2.0]]), &params).unwrap();
        assert_eq!(out[0].x, vec![0.5, 0.5]);

        let out = normalize(&env(array![[1.0, 1.0], [-0.1, 3.0]]), &params).unwrap();
        assert!((out[0].x[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(out[1].x, vec![0.0, 1.0]);
    }

    #[test]
    fn fit_takes_max_and_rejects_flat_channels() {
        let a = env(array![[0.1, 1.0], [0.4, 2.0]]);
        let b = env(array![[0.7, 0.5], [0.2, 0.5]]);
        let p = NormalizationParams::fit([&a, &b]).unwrap();
        assert_eq!(p.channel_max, vec![0.7, 2.0]);
        assert_eq!(
            NormalizationParams::fit([&a]).unwrap().channel_max,
            vec![0.4, 2.0]
        );
        let flat = env(array![[0.0, 1.0], [0.0, 2.0]]);
        assert!(matches!(
            NormalizationParams::fit([&flat]),
            Err(Error::FlatChannel { channel: 0 })
        ));
    }

    #[test]
    fn drops_silent_frames_up_to_one_percent() {
        let params = NormalizationParams {
            channel_max: vec![1.0, 1.0],
        };
        let mut values = Array2::from_elem((200, 2), 0.5);
        values.row_mut(3).fill(0.0);
        let out = normalize(&env(values.clone()), &params).unwrap();
        assert_eq!(out.len(), 199);
        values.row_mut(4).fill(-1.0);
        values.row_mut(5).fill(0.0);
        assert!(normalize(&env(values), &params).is_err());
    }

    #[test]
    fn trimmed_frame_count() {
        let cfg = PipelineConfig::default();
        let rec = Recording {
            subject: "s".into(),
            trial: 0,
            motion: 0,
            sample_rate: 2000.0,
            samples: Array2::from_shape_fn((8000, 2), |(i, d)| ((i * 7 + d * 3) % 11) as f64 - 5.0),
        };
        let pre = Preprocessor::new(&cfg, 2000.0).unwrap();
        let e = pre.envelope(&rec).unwrap();
        assert_eq!(e.values.nrows(), 7600);
        let params = NormalizationParams::fit([&e]).unwrap();
        let patterns = pre.preprocess(&rec, &params).unwrap();
        for p in &patterns {
            assert!(p.x.iter().all(|&v| v >= 0.0));
            assert!((p.x.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let mut bad = rec.clone();
        bad.sample_rate = 1000.0;
        assert!(pre.envelope(&bad).is_err());
    }

    #[test]
    fn config_validation_names_fields() {
        let cfg = PipelineConfig {
            bandstop_order: 3,
            ..Default::default()
        };
        match cfg.validate("pipeline") {
            Err(Error::Config { field, .. }) => assert_eq!(field, "pipeline.bandstop_order"),
            other => panic!("{other:?}"),
        }
        assert!(PipelineConfig::default().validate("pipeline").is_ok());
    }
}
