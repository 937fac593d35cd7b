//! End-to-end segmentation: rescale, pad, split, predict, merge, threshold,
//! trim and rebuild the denoised block matrix.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::Result;
use crate::formatting::{compute_layout, identity_pad, trim_segmentation, wocd_split};
use crate::matrix::{segmentation_to_blocks, CorrelationMatrix, ProbabilityVector, SegmentationVector};
use crate::merge::{binarize, overlap_mean, MergeConfig};
use crate::metrics::{MetricReport, SampleOutcome};
use crate::regressor::{predict, RidgeModel};
use crate::scaling::{rescale_matrix, ScalingParams};
use crate::synth::SynthRecord;

#[derive(Debug, Clone, Copy)]
pub struct PipelineConfig<'m> {
    pub scaling: ScalingParams,
    pub merge: MergeConfig,
    pub model: &'m RidgeModel,
}

impl<'m> PipelineConfig<'m> {
    pub fn new(scaling: ScalingParams, merge: MergeConfig, model: &'m RidgeModel) -> Self {
        Self { scaling, merge, model }
    }

    /// Identity scaling and threshold 0.5.
    pub fn with_defaults(model: &'m RidgeModel) -> Self {
        Self::new(ScalingParams::IDENTITY, MergeConfig::default(), model)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationResult {
    pub segmentation: SegmentationVector,
    /// Noise-free block matrix implied by `segmentation`.
    pub denoised: Array2<f64>,
    /// Merged probabilities trimmed to the input size.
    pub probabilities: ProbabilityVector,
}

pub fn segment(r: &CorrelationMatrix, cfg: &PipelineConfig<'_>) -> Result<SegmentationResult> {
    let (segmentation, probabilities) = segment_vector(r, cfg)?;
    let denoised = segmentation_to_blocks(&segmentation);
    Ok(SegmentationResult {
        segmentation,
        denoised,
        probabilities,
    })
}

/// Like [`segment`] without materializing the denoised matrix.
pub fn segment_vector(
    r: &CorrelationMatrix,
    cfg: &PipelineConfig<'_>,
) -> Result<(SegmentationVector, ProbabilityVector)> {
    // Scale first, then pad, so padding cells keep their exact 0/1 values.
    let scaled = rescale_matrix(r.values(), &cfg.scaling)?;
    let layout = compute_layout(r.size(), cfg.model.throughput())?;
    let padded = identity_pad(scaled.view(), &layout)?;
    let batch = wocd_split(padded.view(), &layout)?;
    let preds = batch
        .windows
        .iter()
        .map(|w| predict(cfg.model, w.view()))
        .collect::<Result<Vec<_>>>()?;
    let merged = overlap_mean(&preds, &layout)?;
    let s0 = binarize(&merged, &cfg.merge);
    let segmentation = trim_segmentation(&s0, &layout)?;
    let mut probs = merged.into_vec();
    probs.truncate(layout.m_in);
    Ok((segmentation, ProbabilityVector::new(probs)?))
}

/// Segments every record and scores the result against its ground truth.
pub fn evaluate(records: &[SynthRecord], cfg: &PipelineConfig<'_>) -> Result<MetricReport> {
    let outcomes = records
        .par_iter()
        .map(|rec| {
            let (predicted, probs) = segment_vector(&rec.matrix, cfg)?;
            Ok(SampleOutcome {
                probabilities: probs.into_vec(),
                predicted,
                truth: rec.segmentation.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    MetricReport::from_outcomes(&outcomes)
}
