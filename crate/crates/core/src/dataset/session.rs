use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::vocab::{MotionVocabulary, VocabularyDef};
use crate::error::{Error, Result};

/// A raw multichannel EMG segment for one (motion, trial).
///
/// `trial` is 0-based; files and manifests use 1-based trial numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub subject: String,
    pub trial: usize,
    pub motion: usize,
    pub sample_rate: f64,
    /// `n_samples x n_channels`, millivolts.
    pub samples: Array2<f64>,
}

impl Recording {
    pub fn n_samples(&self) -> usize {
        self.samples.nrows()
    }

    pub fn n_channels(&self) -> usize {
        self.samples.ncols()
    }
}

/// A simplex-normalized feature vector for one time point.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub x: Vec<f64>,
    pub motion: usize,
    pub trial: usize,
    pub frame_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombinedDef {
    pub name: String,
    pub constituents: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub motion: String,
    /// 1-based.
    pub trial: usize,
}

/// On-disk session description. Recording paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub subject: String,
    pub sample_rate_hz: f64,
    pub n_channels: usize,
    pub basics: Vec<String>,
    pub combineds: Vec<CombinedDef>,
    pub recordings: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn vocabulary_def(&self) -> VocabularyDef {
        VocabularyDef {
            basics: self.basics.clone(),
            combineds: self.combineds.clone(),
        }
    }
}

/// All recordings of one subject, with uniform channel count and rate.
#[derive(Debug, Clone)]
pub struct Session {
    pub subject: String,
    pub vocab: MotionVocabulary,
    pub recordings: Vec<Recording>,
    pub sample_rate: f64,
    pub n_channels: usize,
}

impl Session {
    pub fn new(
        subject: impl Into<String>,
        vocab: MotionVocabulary,
        recordings: Vec<Recording>,
    ) -> Result<Self> {
        let first = recordings
            .first()
            .ok_or_else(|| Error::Session("empty session: no recordings".into()))?;
        let sample_rate = first.sample_rate;
        let n_channels = first.n_channels();
        if sample_rate.is_nan() || sample_rate <= 0.0 {
            return Err(Error::Session(format!(
                "sample rate {sample_rate} must be positive"
            )));
        }
        for r in &recordings {
            if r.n_channels() != n_channels {
                return Err(Error::Session(format!(
                    "channel-count mismatch: trial {} motion {} has {} channels, expected {n_channels}",
                    r.trial + 1,
                    r.motion,
                    r.n_channels()
                )));
            }
            if r.sample_rate != sample_rate {
                return Err(Error::Session(format!(
                    "sample-rate mismatch: {} Hz vs {sample_rate} Hz",
                    r.sample_rate
                )));
            }
            if r.n_samples() == 0 {
                return Err(Error::Session("recording with zero samples".into()));
            }
            if vocab.label(r.motion).is_none() {
                return Err(Error::Session(format!(
                    "motion id {} not in vocabulary",
                    r.motion
                )));
            }
        }
        Ok(Self {
            subject: subject.into(),
            vocab,
            recordings,
            sample_rate,
            n_channels,
        })
    }

    /// Number of trials, i.e. one past the largest trial index present.
    pub fn n_trials(&self) -> usize {
        self.recordings
            .iter()
            .map(|r| r.trial + 1)
            .max()
            .unwrap_or(0)
    }

    /// Writes the manifest and one CSV per recording into `dir`.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let def = self.vocab.to_def();
        let mut entries = Vec::with_capacity(self.recordings.len());
        for r in &self.recordings {
            let file = format!("{}_t{}.csv", self.vocab.name(r.motion), r.trial + 1);
            write_recording_csv(&dir.join(&file), r)?;
            entries.push(ManifestEntry {
                path: PathBuf::from(file),
                motion: self.vocab.name(r.motion).to_string(),
                trial: r.trial + 1,
            });
        }
        let manifest = Manifest {
            subject: self.subject.clone(),
            sample_rate_hz: self.sample_rate,
            n_channels: self.n_channels,
            basics: def.basics,
            combineds: def.combineds,
            recordings: entries,
        };
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

pub fn load_session(manifest_path: &Path) -> Result<Session> {
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::format(manifest_path, e))?;
    let vocab = MotionVocabulary::from_def(&manifest.vocabulary_def())?;
    if manifest.recordings.is_empty() {
        return Err(Error::Session(
            "empty session: manifest lists no recordings".into(),
        ));
    }
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));

    let mut recordings = Vec::with_capacity(manifest.recordings.len());
    for entry in &manifest.recordings {
        let motion = vocab.id(&entry.motion).ok_or_else(|| {
            Error::Session(format!("unknown motion `{}` in manifest", entry.motion))
        })?;
        if entry.trial == 0 {
            return Err(Error::Session("trial numbers are 1-based".into()));
        }
        let path = base.join(&entry.path);
        let samples = read_recording_csv(&path)?;
        if samples.ncols() != manifest.n_channels {
            return Err(Error::Session(format!(
                "channel-count mismatch in {}: {} columns, session has {}",
                path.display(),
                samples.ncols(),
                manifest.n_channels
            )));
        }
        recordings.push(Recording {
            subject: manifest.subject.clone(),
            trial: entry.trial - 1,
            motion,
            sample_rate: manifest.sample_rate_hz,
            samples,
        });
    }
    Session::new(manifest.subject.clone(), vocab, recordings)
}

/// Reads a `ch1,...,chD` CSV into an `n_samples x D` matrix.
pub fn read_recording_csv(path: &Path) -> Result<Array2<f64>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::format(path, e))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::format(path, e))?
        .clone();
    for (i, h) in headers.iter().enumerate() {
        if h.trim() != format!("ch{}", i + 1) {
            return Err(Error::format(
                path,
                format!("unexpected header column `{h}`"),
            ));
        }
    }
    let d = headers.len();
    if d == 0 {
        return Err(Error::format(path, "no channels"));
    }
    let mut data = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(path, e))?;
        if record.len() != d {
            return Err(Error::format(
                path,
                format!("row {} has {} fields, expected {d}", row + 1, record.len()),
            ));
        }
        for field in record.iter() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::format(path, format!("row {}: invalid number `{field}`", row + 1))
            })?;
            data.push(v);
        }
    }
    let n = data.len() / d;
    if n == 0 {
        return Err(Error::format(path, "recording has no samples"));
    }
    Ok(Array2::from_shape_vec((n, d), data).expect("shape checked"))
}

pub fn write_recording_csv(path: &Path, recording: &Recording) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let d = recording.n_channels();
    let header: Vec<String> = (1..=d).map(|i| format!("ch{i}")).collect();
    let mut line = header.join(",");
    line.push('\n');
    for row in recording.samples.rows() {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        line.push('\n');
        if line.len() > 1 << 16 {
            out.write_all(line.as_bytes())
                .map_err(|e| Error::io(path, e))?;
            line.clear();
        }
    }
    out.write_all(line.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn rec(motion: usize, trial: usize, d: usize) -> Recording {
        Recording {
            subject: "s".into(),
            trial,
            motion,
            sample_rate: 100.0,
            samples: Array2::from_elem((5, d), 0.25),
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let r = Recording {
            samples: array![[0.1, -2.5e-7], [1.0 / 3.0, 42.0]],
            ..rec(0, 0, 2)
        };
        let p = dir.path().join("r.csv");
        write_recording_csv(&p, &r).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("ch1,ch2\n"));
        assert_eq!(read_recording_csv(&p).unwrap(), r.samples);
    }

    #[test]
    fn session_rejects_mismatches() {
        let v = MotionVocabulary::build::<&str>(&["A", "B"], &[]).unwrap();
        assert!(Session::new("s", v.clone(), vec![]).is_err());
        assert!(Session::new("s", v.clone(), vec![rec(0, 0, 8), rec(1, 0, 7)]).is_err());
        let mut fast = rec(1, 0, 8);
        fast.sample_rate = 200.0;
        assert!(Session::new("s", v.clone(), vec![rec(0, 0, 8), fast]).is_err());
        assert!(Session::new("s", v, vec![rec(0, 0, 8), rec(5, 0, 8)]).is_err());
    }

    #[test]
    fn save_and_load() {
        let v = MotionVocabulary::build(&["A", "B"], &[("AB", vec!["A", "B"])]).unwrap();
        let recs = (0..3)
            .flat_map(|m| (0..2).map(move |t| rec(m, t, 3)))
            .collect();
        let s = Session::new("s", v, recs).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = s.save(dir.path()).unwrap();
        let back = load_session(&manifest).unwrap();
        assert_eq!(back.recordings, s.recordings);
        assert_eq!(back.n_trials(), 2);
        assert_eq!(back.vocab, s.vocab);
    }

    #[test]
    fn load_reports_column_and_motion_errors() {
        let v = MotionVocabulary::build::<&str>(&["A", "B"], &[]).unwrap();
        let s = Session::new("subj", v, vec![rec(0, 0, 8), rec(1, 0, 8)]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest_path = s.save(dir.path()).unwrap();

        // replace one CSV with a 7-column file
        let narrow = Recording {
            samples: Array2::zeros((3, 7)),
            ..rec(1, 0, 7)
        };
        write_recording_csv(&dir.path().join("B_t1.csv"), &narrow).unwrap();
        let err = load_session(&manifest_path).unwrap_err();
        assert!(err.to_string().contains("channel-count"), "{err}");

        let mut manifest: Manifest =
            serde_json::from_str(&fs::read_to_string(&manifest_path).unwrap()).unwrap();
        manifest.recordings[0].motion = "Z".into();
        fs::write(&manifest_path, serde_json::to_string(&manifest).unwrap()).unwrap();
        assert!(load_session(&manifest_path).is_err());

        manifest.recordings.clear();
        fs::write(&manifest_path, serde_json::to_string(&manifest).unwrap()).unwrap();
        assert!(load_session(&manifest_path)
            .unwrap_err()
            .to_string()
            .contains("empty"));

        assert!(matches!(
            load_session(&dir.path().join("missing.json")),
            Err(Error::Io { .. })
        ));
    }
}
