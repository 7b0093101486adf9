use std::collections::BTreeMap;
use std::ptr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{aggregate, Metrics, Stat, Summary};
use crate::classifier::{build_basis, classify_argmax, classify_patterns};
use crate::dataset::{enumerate_folds, make_split, FoldSpec, Pattern, Session};
use crate::error::{Error, Result};
use crate::mixer::SynthesisConfig;
use crate::network::{init_model, train, Mlp, ModelConfig, TrainConfig};
use crate::seed::derive_seed;
use crate::signal::{normalize, Envelope, NormalizationParams, PipelineConfig, Preprocessor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Basic data plus synthetic combined data; KL basis decision.
    Proposed,
    /// Basic data only; KL basis decision.
    BasicOnly,
    /// Real basic and combined data; arg max over every class.
    FullySupervised,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Proposed, Method::BasicOnly, Method::FullySupervised];

    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::BasicOnly => "basic_only",
            Method::FullySupervised => "fully_supervised",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub method: Method,
    pub pipeline: PipelineConfig,
    pub hidden_dims: Vec<usize>,
    pub train: TrainConfig,
    pub synthesis: SynthesisConfig,
    /// Trials used for training in every fold.
    pub n_train_trials: usize,
    /// Indices into the enumerated folds; `None` runs them all.
    pub folds: Option<Vec<usize>>,
    pub seeds: Vec<u64>,
    /// One decision per recording by majority vote instead of per frame.
    pub segment_voting: bool,
    /// Worker threads; `None` uses the available parallelism.
    pub jobs: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            method: Method::Proposed,
            pipeline: PipelineConfig::default(),
            hidden_dims: vec![64, 64, 64],
            train: TrainConfig::default(),
            synthesis: SynthesisConfig::default(),
            n_train_trials: 2,
            folds: None,
            seeds: vec![0],
            segment_voting: false,
            jobs: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self, field: &str) -> Result<()> {
        self.pipeline.validate(&format!("{field}.pipeline"))?;
        self.train.validate(&format!("{field}.train"))?;
        self.synthesis.validate(&format!("{field}.synthesis"))?;
        if self.hidden_dims.contains(&0) {
            return Err(Error::config(
                format!("{field}.hidden_dims"),
                "widths must be >= 1",
            ));
        }
        if self.synthesis.layer > self.hidden_dims.len() {
            return Err(Error::config(
                format!("{field}.synthesis.layer"),
                format!(
                    "must be <= number of hidden layers ({})",
                    self.hidden_dims.len()
                ),
            ));
        }
        if self.n_train_trials == 0 {
            return Err(Error::config(
                format!("{field}.n_train_trials"),
                "must be >= 1",
            ));
        }
        if self.seeds.is_empty() {
            return Err(Error::config(
                format!("{field}.seeds"),
                "need at least one seed",
            ));
        }
        if self.jobs == Some(0) {
            return Err(Error::config(format!("{field}.jobs"), "must be >= 1"));
        }
        Ok(())
    }
}

/// A session with every recording's envelope computed once.
///
/// Envelopes do not depend on the fold; only normalization does.
#[derive(Debug, Clone)]
pub struct PreparedSession {
    pub session: Session,
    pub envelopes: Vec<Envelope>,
}

/// Normalized patterns of one fold for one method.
#[derive(Debug, Clone)]
pub struct FoldData {
    pub params: NormalizationParams,
    pub train: Vec<Pattern>,
    pub test: Vec<Pattern>,
    /// Recording index of every test pattern.
    pub test_recording: Vec<usize>,
}

impl PreparedSession {
    pub fn new(session: Session, pipeline: &PipelineConfig) -> Result<Self> {
        let pre = Preprocessor::new(pipeline, session.sample_rate)?;
        let envelopes = session
            .recordings
            .par_iter()
            .map(|r| pre.envelope(r))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { session, envelopes })
    }

    pub fn folds(&self, config: &ExperimentConfig) -> Result<Vec<(usize, FoldSpec)>> {
        let all = enumerate_folds(self.session.n_trials(), config.n_train_trials)?;
        match &config.folds {
            None => Ok(all.into_iter().enumerate().collect()),
            Some(pick) => pick
                .iter()
                .map(|&i| {
                    all.get(i).cloned().map(|f| (i, f)).ok_or_else(|| {
                        Error::Experiment(format!("fold {i} out of range 0..{}", all.len()))
                    })
                })
                .collect(),
        }
    }

    fn index_of(&self, r: &crate::dataset::Recording) -> usize {
        self.session
            .recordings
            .iter()
            .position(|x| ptr::eq(x, r))
            .expect("split recordings come from this session")
    }

    pub fn fold_data(&self, method: Method, fold: &FoldSpec) -> Result<FoldData> {
        let split = make_split(&self.session.recordings, fold, &self.session.vocab)?;
        let mut train_idx: Vec<usize> =
            split.train_basic.iter().map(|r| self.index_of(r)).collect();
        if method == Method::FullySupervised {
            train_idx.extend(split.train_combined.iter().map(|r| self.index_of(r)));
        }
        let params = NormalizationParams::fit(train_idx.iter().map(|&i| &self.envelopes[i]))?;
        let mut train = Vec::new();
        for &i in &train_idx {
            train.extend(normalize(&self.envelopes[i], &params)?);
        }
        let mut test = Vec::new();
        let mut test_recording = Vec::new();
        for r in &split.test {
            let i = self.index_of(r);
            let patterns = normalize(&self.envelopes[i], &params)?;
            test_recording.extend(std::iter::repeat_n(i, patterns.len()));
            test.extend(patterns);
        }
        Ok(FoldData {
            params,
            train,
            test,
            test_recording,
        })
    }

    pub fn model_config(&self, method: Method, config: &ExperimentConfig) -> Result<ModelConfig> {
        let vocab = &self.session.vocab;
        let outputs = match method {
            Method::FullySupervised => vocab.len(),
            _ => vocab.n_basic(),
        };
        ModelConfig::new(self.session.n_channels, config.hidden_dims.clone(), outputs)
    }

    /// Trains the model of one fold. Seeds depend on `(seed, fold_index)` only,
    /// so every method sees the same initialization stream and data order.
    pub fn train_model(
        &self,
        method: Method,
        data: &FoldData,
        config: &ExperimentConfig,
        fold_index: usize,
        seed: u64,
    ) -> Result<(Mlp, Vec<f64>)> {
        let model_cfg = self.model_config(method, config)?;
        let mut model = init_model(&model_cfg, derive_seed(seed, &[fold_index as u64, 1]))?;
        let train_cfg = TrainConfig {
            seed: derive_seed(seed, &[fold_index as u64, 2]),
            ..config.train.clone()
        };
        let synthesis = (method == Method::Proposed).then_some(&config.synthesis);
        let history = train(
            &mut model,
            &data.train,
            &self.session.vocab,
            synthesis,
            &train_cfg,
        )?;
        Ok((model, history))
    }

    /// Per-frame class predictions for the fold's test patterns.
    pub fn predict(&self, method: Method, model: &Mlp, data: &FoldData) -> Result<Vec<usize>> {
        match method {
            Method::FullySupervised => classify_argmax(model, &data.test),
            _ => classify_patterns(model, &data.test, &build_basis(&self.session.vocab)),
        }
    }

    /// Truth and prediction lists, per frame or per recording.
    pub fn decisions(
        &self,
        data: &FoldData,
        predictions: &[usize],
        segment_voting: bool,
    ) -> (Vec<usize>, Vec<usize>) {
        if !segment_voting {
            return (
                data.test.iter().map(|p| p.motion).collect(),
                predictions.to_vec(),
            );
        }
        let n_classes = self.session.vocab.len();
        let mut votes: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
        for (&rec, &pred) in data.test_recording.iter().zip(predictions) {
            votes.entry(rec).or_insert_with(|| vec![0; n_classes])[pred] += 1;
        }
        votes
            .into_iter()
            .map(|(rec, counts)| {
                let winner = counts
                    .iter()
                    .enumerate()
                    .fold(
                        (0, 0),
                        |best, (i, &c)| if c > best.1 { (i, c) } else { best },
                    )
                    .0;
                (self.session.recordings[rec].motion, winner)
            })
            .unzip()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRun {
    pub method: Method,
    pub synthesis_layer: Option<usize>,
    pub metrics: Metrics,
    pub loss_history: Vec<f64>,
}

pub fn run_fold(
    method: Method,
    fold_index: usize,
    fold: &FoldSpec,
    prepared: &PreparedSession,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<FoldRun> {
    let data = prepared.fold_data(method, fold)?;
    let (model, loss_history) = prepared.train_model(method, &data, config, fold_index, seed)?;
    let predictions = prepared.predict(method, &model, &data)?;
    let (truth, pred) = prepared.decisions(&data, &predictions, config.segment_voting);
    let metrics =
        Metrics::from_predictions(&prepared.session.vocab, &truth, &pred, fold_index, seed)?;
    Ok(FoldRun {
        method,
        synthesis_layer: (method == Method::Proposed).then_some(config.synthesis.layer),
        metrics,
        loss_history,
    })
}

struct Job {
    method: Method,
    layer: usize,
    seed: u64,
    fold_index: usize,
    fold: FoldSpec,
}

fn run_jobs(
    prepared: &PreparedSession,
    config: &ExperimentConfig,
    jobs: Vec<Job>,
) -> Result<Vec<FoldRun>> {
    let threads = config
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .min(jobs.len().max(1));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Experiment(e.to_string()))?;
    pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let cfg = ExperimentConfig {
                    synthesis: SynthesisConfig {
                        layer: job.layer,
                        ..config.synthesis.clone()
                    },
                    ..config.clone()
                };
                run_fold(
                    job.method,
                    job.fold_index,
                    &job.fold,
                    prepared,
                    &cfg,
                    job.seed,
                )
            })
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub synthesis_layer: Option<usize>,
    pub summary: Summary,
    pub runs: Vec<FoldRun>,
}

/// Runs `methods` over every selected fold and seed.
pub fn compare(
    prepared: &PreparedSession,
    config: &ExperimentConfig,
    methods: &[Method],
) -> Result<Vec<MethodSummary>> {
    config.validate("experiment")?;
    let folds = prepared.folds(config)?;
    let mut jobs = Vec::new();
    for &method in methods {
        for &seed in &config.seeds {
            for (fold_index, fold) in &folds {
                jobs.push(Job {
                    method,
                    layer: config.synthesis.layer,
                    seed,
                    fold_index: *fold_index,
                    fold: fold.clone(),
                });
            }
        }
    }
    let runs = run_jobs(prepared, config, jobs)?;
    let per_method = runs.len() / methods.len().max(1);
    methods
        .iter()
        .zip(runs.chunks(per_method.max(1)))
        .map(|(&method, chunk)| {
            let metrics: Vec<Metrics> = chunk.iter().map(|r| r.metrics.clone()).collect();
            Ok(MethodSummary {
                method,
                synthesis_layer: (method == Method::Proposed).then_some(config.synthesis.layer),
                summary: aggregate(&metrics)?,
                runs: chunk.to_vec(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerPoint {
    pub layer: usize,
    pub overall: Stat,
    pub basic: Option<Stat>,
    pub combined: Option<Stat>,
    pub runs: usize,
}

/// Proposed method at each synthesis layer; statistics over fold x seed runs
/// (population standard deviation).
pub fn layer_sweep(
    prepared: &PreparedSession,
    config: &ExperimentConfig,
    layers: &[usize],
) -> Result<Vec<LayerPoint>> {
    config.validate("experiment")?;
    if let Some(&bad) = layers.iter().find(|&&n| n > config.hidden_dims.len()) {
        return Err(Error::Experiment(format!(
            "layer {bad} beyond model depth {}",
            config.hidden_dims.len()
        )));
    }
    let folds = prepared.folds(config)?;
    let mut jobs = Vec::new();
    for &layer in layers {
        for &seed in &config.seeds {
            for (fold_index, fold) in &folds {
                jobs.push(Job {
                    method: Method::Proposed,
                    layer,
                    seed,
                    fold_index: *fold_index,
                    fold: fold.clone(),
                });
            }
        }
    }
    let runs = run_jobs(prepared, config, jobs)?;
    let per_layer = folds.len() * config.seeds.len();
    layers
        .iter()
        .zip(runs.chunks(per_layer.max(1)))
        .map(|(&layer, chunk)| {
            let metrics: Vec<Metrics> = chunk.iter().map(|r| r.metrics.clone()).collect();
            let s = aggregate(&metrics)?;
            Ok(LayerPoint {
                layer,
                overall: s
                    .overall_accuracy
                    .ok_or_else(|| Error::Experiment("no test frames".into()))?,
                basic: s.basic_accuracy,
                combined: s.combined_accuracy,
                runs: chunk.len(),
            })
        })
        .collect()
}
