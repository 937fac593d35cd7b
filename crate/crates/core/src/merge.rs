//! Overlap Mean merging of per-window predictions and thresholding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formatting::WindowLayout;
use crate::matrix::{ProbabilityVector, SegmentationVector};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeConfig {
    pub threshold: f64,
}

impl MergeConfig {
    pub fn new(threshold: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::InvalidThreshold(threshold));
        }
        Ok(Self { threshold })
    }
}

impl Default for MergeConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

/// Averages window predictions onto the padded index range. Every global
/// index takes the plain mean over the windows covering it.
pub fn overlap_mean(preds: &[ProbabilityVector], layout: &WindowLayout) -> Result<ProbabilityVector> {
    if preds.len() != layout.v {
        return Err(Error::LayoutMismatch {
            expected: layout.v,
            found: preds.len(),
        });
    }
    let t = layout.throughput;
    if let Some(bad) = preds.iter().find(|p| p.len() != t) {
        return Err(Error::LayoutMismatch {
            expected: t,
            found: bad.len(),
        });
    }
    let mut sum = vec![0.0; layout.m0];
    let mut count = vec![0u32; layout.m0];
    for (i, p) in preds.iter().enumerate() {
        let start = layout.window_start(i);
        for (k, &value) in p.as_slice().iter().enumerate() {
            sum[start + k] += value;
            count[start + k] += 1;
        }
    }
    let merged = sum.into_iter().zip(count).map(|(s, c)| s / f64::from(c)).collect();
    // means of values in [0, 1] stay in [0, 1]
    ProbabilityVector::clamped(merged)
}

/// `bit[g] = s[g] >= threshold`, with bit 0 forced on.
pub fn binarize(s: &ProbabilityVector, cfg: &MergeConfig) -> SegmentationVector {
    let bits = s.as_slice().iter().map(|&p| p >= cfg.threshold).collect();
    SegmentationVector::forcing_start(bits).expect("probability vectors are non-empty")
}
