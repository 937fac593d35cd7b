//! Segmentation of noisy, spatially ordered correlation matrices.
//!
//! A square correlation matrix whose elements form contiguous correlated
//! groups is padded and cut into overlapping `T×T` windows along the
//! diagonal, rescaled onto the design scale, passed through a ridge
//! regressor that predicts per-position group-start probabilities, and the
//! window predictions are averaged back into a single vector which is then
//! thresholded and trimmed to the input size.
//!
//! ```
//! use cosenet::{pipeline, regressor, synth};
//!
//! let spec = synth::SynthSpec::new(8, 0.0, 0.0, 3.0, 1.0, 512, 7);
//! let data = synth::generate_dataset(&spec).unwrap();
//! let ts = regressor::TrainingSet::from_records(&data.train, 8, regressor::Split::Train).unwrap();
//! let model = regressor::train_ridge(&ts, 1.0, false).unwrap();
//!
//! let cfg = pipeline::PipelineConfig::with_defaults(&model);
//! let out = pipeline::segment(&data.test[0].matrix, &cfg).unwrap();
//! assert_eq!(out.segmentation.len(), 8);
//! ```

pub mod error;
pub mod formatting;
mod linalg;
pub mod matrix;
pub mod merge;
pub mod metrics;
pub mod pipeline;
pub mod regressor;
pub mod scaling;
pub mod synth;
pub mod tuner;

pub use error::{Error, Result};
pub use matrix::{CorrelationMatrix, ProbabilityVector, SegmentationVector};
