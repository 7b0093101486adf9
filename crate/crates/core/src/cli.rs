//! Command-line front end.
//!
//! Every command reads one JSON config (`--config`, or the path in
//! `EMGMIX_CONFIG`), applies flag overrides, and writes the merged result to
//! `effective_config.json` under `--out` next to its other outputs.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or config error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::dataset::{load_session, FoldSpec, MotionVocabulary, Session, VocabularyDef};
use crate::error::{Error, Result};
use crate::harness::{
    aggregate, compare, layer_sweep, write_compare_bundle, write_confusion_csv,
    write_layer_sweep_csv, write_pattern_report, write_predictions_csv, ExperimentConfig, FoldData,
    Method, Metrics, PreparedSession,
};
use crate::mixer::SynthesisConfig;
use crate::network::{load_checkpoint, save_checkpoint, TrainConfig};
use crate::signal::{normalize, NormalizationParams, PipelineConfig};
use crate::simulator::{default_spec_with_channels, simulate_session, Simulator, SimulatorSpec};

pub const CONFIG_ENV: &str = "EMGMIX_CONFIG";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    /// Session manifest, or a directory containing `manifest.json`.
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// Simulator knobs on top of the built-in ring-electrode defaults.
/// Unset options are filled in when the config is resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulatorSection {
    pub subject: String,
    pub channels: usize,
    pub vocabulary: Option<VocabularyDef>,
    pub envelopes: Option<Vec<Vec<f64>>>,
    pub duration_s: f64,
    pub sample_rate: f64,
    pub trials: usize,
    pub emg_band: (f64, f64),
    pub interference_hz: f64,
    pub interference_amp: Option<f64>,
    pub baseline_noise: f64,
    pub combine_gain: f64,
    pub cocontraction_gamma: f64,
    pub trial_jitter: f64,
    /// Defaults to the top-level seed.
    pub seed: Option<u64>,
}

impl Default for SimulatorSection {
    fn default() -> Self {
        let spec = default_spec_with_channels(&MotionVocabulary::upper_limb(), 8, 0);
        Self {
            subject: spec.subject,
            channels: 8,
            vocabulary: None,
            envelopes: None,
            duration_s: spec.duration_s,
            sample_rate: spec.sample_rate,
            trials: spec.trials,
            emg_band: spec.emg_band,
            interference_hz: spec.interference_hz,
            interference_amp: None,
            baseline_noise: spec.baseline_noise,
            combine_gain: spec.combine_gain,
            cocontraction_gamma: spec.cocontraction_gamma,
            trial_jitter: spec.trial_jitter,
            seed: None,
        }
    }
}

impl SimulatorSection {
    pub fn to_spec(&self, base_seed: u64) -> Result<SimulatorSpec> {
        let vocab = match &self.vocabulary {
            Some(def) => MotionVocabulary::from_def(def)?,
            None => MotionVocabulary::upper_limb(),
        };
        let mut spec =
            default_spec_with_channels(&vocab, self.channels, self.seed.unwrap_or(base_seed));
        if let Some(env) = &self.envelopes {
            spec.envelopes = env.clone();
        }
        spec.subject = self.subject.clone();
        spec.duration_s = self.duration_s;
        spec.sample_rate = self.sample_rate;
        spec.trials = self.trials;
        spec.emg_band = self.emg_band;
        spec.interference_hz = self.interference_hz;
        if let Some(a) = self.interference_amp {
            spec.interference_amp = a;
        }
        spec.baseline_noise = self.baseline_noise;
        spec.combine_gain = self.combine_gain;
        spec.cocontraction_gamma = self.cocontraction_gamma;
        spec.trial_jitter = self.trial_jitter;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub hidden_dims: Vec<usize>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            hidden_dims: ExperimentConfig::default().hidden_dims,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub method: Method,
    pub n_train_trials: usize,
    pub folds: Option<Vec<usize>>,
    /// Defaults to `[seed]`.
    pub seeds: Option<Vec<u64>>,
    pub segment_voting: bool,
    pub jobs: Option<usize>,
    /// Layers visited by `sweep-layers`.
    pub layers: Vec<usize>,
    /// Fold trained by `train`.
    pub fold: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let d = ExperimentConfig::default();
        Self {
            method: d.method,
            n_train_trials: d.n_train_trials,
            folds: d.folds,
            seeds: None,
            segment_voting: d.segment_voting,
            jobs: d.jobs,
            layers: vec![0, 1, 2, 3],
            fold: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub seed: u64,
    pub paths: PathsSection,
    pub simulator: SimulatorSection,
    pub pipeline: PipelineConfig,
    pub model: ModelSection,
    pub train: TrainConfig,
    pub synthesis: SynthesisConfig,
    pub experiment: ExperimentSection,
}

impl CliConfig {
    /// Parses JSON, reporting the path of the offending field on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(
                if path == "." { "<root>".into() } else { path },
                e.into_inner().to_string(),
            )
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Fills every derived default so the echoed config is fully explicit.
    pub fn resolve(&mut self) -> Result<()> {
        let spec = self.simulator.to_spec(self.seed)?;
        self.simulator.seed = Some(spec.seed);
        self.simulator.interference_amp = Some(spec.interference_amp);
        if self.experiment.seeds.is_none() {
            self.experiment.seeds = Some(vec![self.seed]);
        }
        Ok(())
    }

    pub fn experiment_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            method: self.experiment.method,
            pipeline: self.pipeline.clone(),
            hidden_dims: self.model.hidden_dims.clone(),
            train: self.train.clone(),
            synthesis: self.synthesis.clone(),
            n_train_trials: self.experiment.n_train_trials,
            folds: self.experiment.folds.clone(),
            seeds: self
                .experiment
                .seeds
                .clone()
                .unwrap_or_else(|| vec![self.seed]),
            segment_voting: self.experiment.segment_voting,
            jobs: self.experiment.jobs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.experiment_config()
            .validate("experiment")
            .map_err(|e| match e {
                // Sections live at the top level of the file, not under `experiment`.
                Error::Config { field, message } => Error::Config {
                    field: relocate(&field),
                    message,
                },
                other => other,
            })?;
        if let Some(&bad) = self
            .experiment
            .layers
            .iter()
            .find(|&&n| n > self.model.hidden_dims.len())
        {
            return Err(Error::config(
                "experiment.layers",
                format!(
                    "layer {bad} exceeds the {} hidden layers",
                    self.model.hidden_dims.len()
                ),
            ));
        }
        if self.simulator.channels == 0 {
            return Err(Error::config("simulator.channels", "must be >= 1"));
        }
        self.simulator
            .to_spec(self.seed)
            .and_then(Simulator::new)
            .map_err(|e| Error::config("simulator", e.to_string()))?;
        Ok(())
    }
}

fn relocate(field: &str) -> String {
    let rest = field.strip_prefix("experiment.").unwrap_or(field);
    match rest.split('.').next() {
        Some("pipeline" | "train" | "synthesis") => rest.to_string(),
        Some("hidden_dims") => format!("model.{rest}"),
        _ => field.to_string(),
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "emgmix",
    version,
    about = "Combined-motion EMG classification with mixed synthetic data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON config file (default: $EMGMIX_CONFIG, else built-in defaults).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base seed; also replaces the experiment seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for fold-level parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct DataArg {
    /// Session manifest or the directory holding `manifest.json`.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic session.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Train one fold and save the model.
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArg,
        /// proposed, basic_only or fully_supervised.
        #[arg(long)]
        method: Option<String>,
        /// Synthesis layer for the proposed method.
        #[arg(long)]
        layer: Option<usize>,
        /// Fold index among the enumerated trial combinations.
        #[arg(long)]
        fold: Option<usize>,
    },
    /// Evaluate a model written by `train` on its fold's test trials.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArg,
        /// Directory written by `train`.
        #[arg(long)]
        model: PathBuf,
    },
    /// Run all three methods over the selected folds.
    Compare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArg,
        /// Synthesis layer for the proposed method.
        #[arg(long)]
        layer: Option<usize>,
    },
    /// Proposed method at several synthesis layers.
    SweepLayers {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArg,
        /// Comma separated, e.g. 0,1,2,3.
        #[arg(long, value_delimiter = ',')]
        layers: Option<Vec<usize>>,
    },
    /// Averaged patterns, synthetic samples and PCA projections.
    Report {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArg,
    },
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other),
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load_config(common: &Common) -> std::result::Result<CliConfig, Failure> {
    let path = common.config.clone().or_else(|| {
        std::env::var_os(CONFIG_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    });
    let mut config = match path {
        Some(p) => match CliConfig::load(&p) {
            Err(Error::Io { path, source }) => {
                return Err(Failure::Usage(format!(
                    "cannot read config {}: {source}",
                    path.display()
                )))
            }
            other => other?,
        },
        None => CliConfig::default(),
    };
    if let Some(out) = &common.out {
        config.paths.out = Some(out.clone());
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
        config.simulator.seed = Some(seed);
        config.experiment.seeds = Some(vec![seed]);
    }
    if let Some(jobs) = common.jobs {
        config.experiment.jobs = Some(jobs);
    }
    Ok(config)
}

fn finish_config(config: &mut CliConfig) -> std::result::Result<PathBuf, Failure> {
    config.resolve()?;
    config.validate()?;
    let out =
        config.paths.out.clone().ok_or_else(|| {
            Failure::Usage("no output directory: pass --out or set paths.out".into())
        })?;
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let text = serde_json::to_string_pretty(config).expect("config serializes") + "\n";
    let path = out.join("effective_config.json");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(out)
}

fn apply_data(config: &mut CliConfig, data: &DataArg) {
    if let Some(d) = &data.data {
        config.paths.data = Some(d.clone());
    }
}

fn manifest_path(config: &CliConfig) -> std::result::Result<PathBuf, Failure> {
    let data = config
        .paths
        .data
        .clone()
        .ok_or_else(|| Failure::Usage("no session: pass --data or set paths.data".into()))?;
    let path = if data.is_dir() {
        data.join("manifest.json")
    } else {
        data
    };
    if !path.exists() {
        return Err(Failure::Usage(format!(
            "session manifest {} not found",
            path.display()
        )));
    }
    Ok(path)
}

fn prepare(config: &CliConfig) -> std::result::Result<PreparedSession, Failure> {
    let session: Session = load_session(&manifest_path(config)?)?;
    Ok(PreparedSession::new(session, &config.pipeline)?)
}

fn parse_method(name: &str) -> std::result::Result<Method, Failure> {
    Method::parse(name).ok_or_else(|| {
        Failure::Usage(format!(
            "unknown method `{name}` (expected proposed, basic_only or fully_supervised)"
        ))
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("value serializes") + "\n";
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}

/// Written by `train`, read back by `evaluate`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct FoldInfo {
    method: Method,
    synthesis_layer: Option<usize>,
    fold: usize,
    seed: u64,
    /// 1-based, like the manifest.
    train_trials: Vec<usize>,
    test_trials: Vec<usize>,
}

fn dispatch(command: Command) -> std::result::Result<(), Failure> {
    match command {
        Command::Simulate { common } => {
            let mut config = load_config(&common)?;
            let out = finish_config(&mut config)?;
            let spec = config.simulator.to_spec(config.seed)?;
            let manifest = simulate_session(&spec, &out)?;
            eprintln!("wrote {}", manifest.display());
        }
        Command::Train {
            common,
            data,
            method,
            layer,
            fold,
        } => {
            let mut config = load_config(&common)?;
            apply_data(&mut config, &data);
            if let Some(m) = method {
                config.experiment.method = parse_method(&m)?;
            }
            if let Some(n) = layer {
                config.synthesis.layer = n;
            }
            if let Some(f) = fold {
                config.experiment.fold = f;
            }
            let out = finish_config(&mut config)?;
            train_command(&config, &out)?;
        }
        Command::Evaluate {
            common,
            data,
            model,
        } => {
            let mut config = load_config(&common)?;
            apply_data(&mut config, &data);
            let out = finish_config(&mut config)?;
            evaluate_command(&config, &model, &out)?;
        }
        Command::Compare {
            common,
            data,
            layer,
        } => {
            let mut config = load_config(&common)?;
            apply_data(&mut config, &data);
            if let Some(n) = layer {
                config.synthesis.layer = n;
            }
            let out = finish_config(&mut config)?;
            let prepared = prepare(&config)?;
            let results = compare(&prepared, &config.experiment_config(), &Method::ALL)?;
            write_compare_bundle(&out, &prepared, &results)?;
            for r in &results {
                let show = |s: Option<crate::harness::Stat>| {
                    s.map_or("n/a".to_string(), |s| format!("{:.3}±{:.3}", s.mean, s.std))
                };
                eprintln!(
                    "{:<17} basic {}  combined {}  overall {}",
                    r.method.name(),
                    show(r.summary.basic_accuracy),
                    show(r.summary.combined_accuracy),
                    show(r.summary.overall_accuracy)
                );
            }
        }
        Command::SweepLayers {
            common,
            data,
            layers,
        } => {
            let mut config = load_config(&common)?;
            apply_data(&mut config, &data);
            if let Some(l) = layers {
                config.experiment.layers = l;
            }
            let out = finish_config(&mut config)?;
            let prepared = prepare(&config)?;
            let points = layer_sweep(
                &prepared,
                &config.experiment_config(),
                &config.experiment.layers,
            )?;
            write_layer_sweep_csv(&out.join("layer_sweep.csv"), &points)?;
            for p in &points {
                eprintln!(
                    "layer {}: {:.3}±{:.3}",
                    p.layer, p.overall.mean, p.overall.std
                );
            }
        }
        Command::Report { common, data } => {
            let mut config = load_config(&common)?;
            apply_data(&mut config, &data);
            let out = finish_config(&mut config)?;
            let prepared = prepare(&config)?;
            write_pattern_report(&out, &prepared, &config.experiment_config())?;
        }
    }
    Ok(())
}

fn train_command(config: &CliConfig, out: &Path) -> std::result::Result<(), Failure> {
    let prepared = prepare(config)?;
    let exp = ExperimentConfig {
        folds: Some(vec![config.experiment.fold]),
        ..config.experiment_config()
    };
    let (fold_index, fold) = prepared.folds(&exp)?.remove(0);
    let method = exp.method;
    let seed = exp.seeds[0];
    let data = prepared.fold_data(method, &fold)?;
    let (model, history) = prepared.train_model(method, &data, &exp, fold_index, seed)?;
    save_checkpoint(&model, &out.join("model.json"))?;
    write_json(&out.join("normalization.json"), &data.params)?;
    let mut csv = String::from("epoch,loss\n");
    for (i, l) in history.iter().enumerate() {
        let _ = writeln!(csv, "{},{l}", i + 1);
    }
    let path = out.join("loss_history.csv");
    fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
    let info = FoldInfo {
        method,
        synthesis_layer: (method == Method::Proposed).then_some(exp.synthesis.layer),
        fold: fold_index,
        seed,
        train_trials: fold.train_trials.iter().map(|t| t + 1).collect(),
        test_trials: fold.test_trials.iter().map(|t| t + 1).collect(),
    };
    write_json(&out.join("fold.json"), &info)?;
    eprintln!(
        "trained {} on fold {fold_index}: final loss {:.4}",
        method.name(),
        history.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

fn evaluate_command(
    config: &CliConfig,
    model_dir: &Path,
    out: &Path,
) -> std::result::Result<(), Failure> {
    let info: FoldInfo = read_json(&model_dir.join("fold.json"))?;
    let params: NormalizationParams = read_json(&model_dir.join("normalization.json"))?;
    let model = load_checkpoint(&model_dir.join("model.json"))?;
    let prepared = prepare(config)?;
    let session = &prepared.session;
    if info.train_trials.contains(&0) {
        return Err(Error::Format {
            path: model_dir.join("fold.json"),
            message: "trials are 1-based".into(),
        }
        .into());
    }
    let fold = FoldSpec::new(session.n_trials(), info.train_trials.iter().map(|t| t - 1))?;
    let mut test = Vec::new();
    let mut test_recording = Vec::new();
    for (i, rec) in session.recordings.iter().enumerate() {
        if fold.test_trials.contains(&rec.trial) {
            let patterns = normalize(&prepared.envelopes[i], &params)?;
            test_recording.extend(std::iter::repeat_n(i, patterns.len()));
            test.extend(patterns);
        }
    }
    let data = FoldData {
        params,
        train: Vec::new(),
        test,
        test_recording,
    };
    let predictions = prepared.predict(info.method, &model, &data)?;
    let (truth, pred) = prepared.decisions(&data, &predictions, config.experiment.segment_voting);
    let metrics = Metrics::from_predictions(&session.vocab, &truth, &pred, info.fold, info.seed)?;
    write_json(&out.join("metrics.json"), &metrics)?;
    let summary = aggregate(std::slice::from_ref(&metrics))?;
    write_confusion_csv(
        &out.join("confusion.csv"),
        &session.vocab,
        &summary.confusion_normalized,
    )?;
    write_predictions_csv(
        &out.join("predictions.csv"),
        &session.vocab,
        &data.test,
        &predictions,
    )?;
    eprintln!(
        "{} fold {}: basic {:?} combined {:?} overall {:?}",
        info.method.name(),
        info.fold,
        metrics.basic_accuracy,
        metrics.combined_accuracy,
        metrics.overall_accuracy
    );
    Ok(())
}
