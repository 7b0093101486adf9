//! Recognition of unseen combined upper-limb motions from multichannel EMG.
//!
//! Only basic-motion recordings are needed for training. Synthetic
//! combined-motion samples are formed as Dirichlet-weighted convex
//! combinations of basic patterns at a chosen network layer, a small MLP is
//! trained on a two-term cross-entropy, and test frames are assigned to the
//! basis probability vector with the smallest KL divergence.
//!
//! | module | role |
//! |---|---|
//! | [`dataset`] | vocabulary, recordings, manifests, trial folds |
//! | [`signal`] | band-stop, rectification, envelope, normalization |
//! | [`simulator`] | seeded ground-truth EMG sessions |
//! | [`mixer`] | Dirichlet ratios and convex-combination synthesis |
//! | [`network`] | MLP, composite loss, backprop, Adam, training |
//! | [`classifier`] | basis vectors and the KL decision rule |
//! | [`harness`] | folds, baselines, layer sweep, reports |
//! | [`cli`] | the `emgmix` command line |
//!
//! Runnable walkthroughs live in `examples/`.

pub mod classifier;
pub mod cli;
pub mod dataset;
mod error;
pub mod harness;
pub mod mixer;
pub mod network;
pub mod seed;
pub mod signal;
pub mod simulator;

pub use error::{Error, Result};
