//! Plot-ready CSV/JSON artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::experiment::{ExperimentConfig, LayerPoint, Method, MethodSummary, PreparedSession};
use super::pca::pca_project;
use crate::dataset::{MotionVocabulary, Pattern};
use crate::error::{Error, Result};
use crate::mixer::{build_synthetic_set, MixedSample, SynthesisConfig};
use crate::network::init_model;
use crate::seed::rng_for;

/// Points kept per group in PCA files.
const PCA_POINTS_PER_GROUP: usize = 200;

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Componentwise mean of simplex patterns.
pub fn average_pattern(patterns: &[&[f64]]) -> Result<Vec<f64>> {
    let first = patterns
        .first()
        .ok_or_else(|| Error::Experiment("cannot average an empty pattern set".into()))?;
    let mut acc = vec![0.0; first.len()];
    for p in patterns {
        if p.len() != acc.len() {
            return Err(Error::DimensionMismatch {
                expected: acc.len(),
                actual: p.len(),
            });
        }
        acc.iter_mut().zip(p.iter()).for_each(|(a, v)| *a += v);
    }
    let n = patterns.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

#[derive(Serialize)]
struct FoldLine {
    fold: usize,
    seed: u64,
    basic_accuracy: Option<f64>,
    combined_accuracy: Option<f64>,
    overall_accuracy: Option<f64>,
}

#[derive(Serialize)]
struct MethodEntry<'a> {
    method: Method,
    synthesis_layer: Option<usize>,
    runs: usize,
    basic_accuracy: Option<super::Stat>,
    combined_accuracy: Option<super::Stat>,
    overall_accuracy: Option<super::Stat>,
    folds: Vec<FoldLine>,
    confusion: &'a [Vec<u64>],
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    subject: &'a str,
    classes: Vec<&'a str>,
    methods: Vec<MethodEntry<'a>>,
}

fn confusion_csv(vocab: &MotionVocabulary, rows: &[Vec<f64>]) -> String {
    let mut out = String::from("true");
    for l in vocab.labels() {
        out.push(',');
        out.push_str(&l.name);
    }
    out.push('\n');
    for (label, row) in vocab.labels().iter().zip(rows) {
        out.push_str(&label.name);
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// `summary.json` plus one row-normalized `confusion_<method>.csv` per method.
pub fn write_compare_bundle(
    out_dir: &Path,
    prepared: &PreparedSession,
    results: &[MethodSummary],
) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let vocab = &prepared.session.vocab;
    let file = SummaryFile {
        subject: &prepared.session.subject,
        classes: vocab.labels().iter().map(|l| l.name.as_str()).collect(),
        methods: results
            .iter()
            .map(|r| MethodEntry {
                method: r.method,
                synthesis_layer: r.synthesis_layer,
                runs: r.summary.runs,
                basic_accuracy: r.summary.basic_accuracy,
                combined_accuracy: r.summary.combined_accuracy,
                overall_accuracy: r.summary.overall_accuracy,
                folds: r
                    .runs
                    .iter()
                    .map(|run| FoldLine {
                        fold: run.metrics.fold,
                        seed: run.metrics.seed,
                        basic_accuracy: run.metrics.basic_accuracy,
                        combined_accuracy: run.metrics.combined_accuracy,
                        overall_accuracy: run.metrics.overall_accuracy,
                    })
                    .collect(),
                confusion: &r.summary.confusion,
            })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&file).expect("summary serializes");
    write(&out_dir.join("summary.json"), &(json + "\n"))?;
    for r in results {
        let path = out_dir.join(format!("confusion_{}.csv", r.method.name()));
        write(
            &path,
            &confusion_csv(vocab, &r.summary.confusion_normalized),
        )?;
    }
    Ok(())
}

/// Row-normalized confusion matrix with class names as header and first column.
pub fn write_confusion_csv(path: &Path, vocab: &MotionVocabulary, rows: &[Vec<f64>]) -> Result<()> {
    write(path, &confusion_csv(vocab, rows))
}

pub fn write_layer_sweep_csv(path: &Path, points: &[LayerPoint]) -> Result<()> {
    let mut out = String::from("layer,mean,std\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.layer, p.overall.mean, p.overall.std);
    }
    write(path, &out)
}

/// `motion_true,motion_pred,trial,frame` per test pattern.
pub fn write_predictions_csv(
    path: &Path,
    vocab: &MotionVocabulary,
    patterns: &[Pattern],
    predictions: &[usize],
) -> Result<()> {
    let mut out = String::from("motion_true,motion_pred,trial,frame\n");
    for (p, &pred) in patterns.iter().zip(predictions) {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            vocab.name(p.motion),
            vocab.name(pred),
            p.trial + 1,
            p.frame_index
        );
    }
    write(path, &out)
}

fn every_nth<T: Clone>(items: &[T], max: usize) -> Vec<T> {
    let step = items.len().div_ceil(max).max(1);
    items.iter().step_by(step).cloned().collect()
}

fn synthetic_csv(vocab: &MotionVocabulary, samples: &[MixedSample]) -> String {
    let d = samples.first().map_or(0, |s| s.z.len());
    let k = samples.iter().map(|s| s.lambda.len()).max().unwrap_or(0);
    let mut out = String::from("motion,trial,frame");
    (1..=d).for_each(|i| {
        let _ = write!(out, ",x{i}");
    });
    (1..=k).for_each(|i| {
        let _ = write!(out, ",lambda{i}");
    });
    out.push('\n');
    for (i, s) in samples.iter().enumerate() {
        let _ = write!(out, "{},0,{i}", vocab.name(s.combined_class));
        s.z.iter().for_each(|v| {
            let _ = write!(out, ",{v}");
        });
        for j in 0..k {
            match s.lambda.get(j) {
                Some(l) => {
                    let _ = write!(out, ",{l}");
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

/// Input-layer synthesis artifacts for the first selected fold:
/// `radar_<motion>.csv`, `pca_<motion>.csv` and `synthetic_patterns.csv`.
pub fn write_pattern_report(
    out_dir: &Path,
    prepared: &PreparedSession,
    config: &ExperimentConfig,
) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let vocab = &prepared.session.vocab;
    let (fold_index, fold) = prepared
        .folds(config)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Experiment("no folds selected".into()))?;
    let data = prepared.fold_data(Method::Proposed, &fold)?;
    let seed = config.seeds[0];
    let model = init_model(&prepared.model_config(Method::Proposed, config)?, seed)?;
    let synth_cfg = SynthesisConfig {
        layer: 0,
        ..config.synthesis.clone()
    };
    let mut rng = rng_for(seed, &[fold_index as u64, 3]);
    let synthetic = build_synthetic_set(&model, &data.train, vocab, &synth_cfg, &mut rng)?;
    write(
        &out_dir.join("synthetic_patterns.csv"),
        &synthetic_csv(vocab, &synthetic),
    )?;

    let first_test_trial = *fold.test_trials.iter().next().expect("nonempty test set");
    for label in vocab.combineds() {
        let actual_trial: Vec<&[f64]> = data
            .test
            .iter()
            .filter(|p| p.motion == label.id && p.trial == first_test_trial)
            .map(|p| p.x.as_slice())
            .collect();
        let synth: Vec<&[f64]> = synthetic
            .iter()
            .filter(|s| s.combined_class == label.id)
            .map(|s| s.z.as_slice())
            .collect();
        if actual_trial.is_empty() || synth.is_empty() {
            continue;
        }
        let actual_mean = average_pattern(&actual_trial)?;
        let synth_mean = average_pattern(&synth)?;
        let mut radar = String::from("channel,actual,synthetic\n");
        for (d, (a, s)) in actual_mean.iter().zip(&synth_mean).enumerate() {
            let _ = writeln!(radar, "{},{a},{s}", d + 1);
        }
        write(&out_dir.join(format!("radar_{}.csv", label.name)), &radar)?;

        // constituents and the real combined motion are "actual"; mixtures "synthetic"
        let mut actual_pts: Vec<(String, Vec<f64>)> = Vec::new();
        for &b in &label.constituents {
            let pts: Vec<Vec<f64>> = data
                .train
                .iter()
                .filter(|p| p.motion == b)
                .map(|p| p.x.clone())
                .collect();
            for x in every_nth(&pts, PCA_POINTS_PER_GROUP) {
                actual_pts.push((vocab.name(b).to_string(), x));
            }
        }
        let real: Vec<Vec<f64>> = data
            .test
            .iter()
            .filter(|p| p.motion == label.id)
            .map(|p| p.x.clone())
            .collect();
        for x in every_nth(&real, PCA_POINTS_PER_GROUP) {
            actual_pts.push((label.name.clone(), x));
        }
        let synth_pts = every_nth(
            &synth.iter().map(|s| s.to_vec()).collect::<Vec<_>>(),
            PCA_POINTS_PER_GROUP,
        );
        let actual_x: Vec<Vec<f64>> = actual_pts.iter().map(|(_, x)| x.clone()).collect();
        let proj = pca_project(&actual_x, &synth_pts)?;
        let mut csv = String::from("x,y,label,origin\n");
        for (i, c) in proj.coords.iter().enumerate() {
            let (name, origin) = if i < actual_pts.len() {
                (actual_pts[i].0.as_str(), "actual")
            } else {
                (label.name.as_str(), "synthetic")
            };
            let _ = writeln!(csv, "{},{},{name},{origin}", c[0], c[1]);
        }
        write(&out_dir.join(format!("pca_{}.csv", label.name)), &csv)?;
    }
    Ok(())
}
