//! Preprocessing front end: power-line band-stop, full-wave rectification,
//! envelope smoothing, transient trimming and two-step normalization.

mod filter;
mod pipeline;

pub use filter::{
    design_bandstop, design_highpass, design_lowpass, filter_forward, Biquad, BiquadCascade,
};
pub use pipeline::{
    fit_normalization, normalize, preprocess, write_patterns_csv, Envelope, NormalizationParams,
    PipelineConfig, Preprocessor,
};
