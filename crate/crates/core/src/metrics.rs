//! Regression and segmentation metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SegmentationVector;

fn check_lengths(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

pub fn mse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred, truth)?;
    Ok(pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / pred.len() as f64)
}

pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred, truth)?;
    Ok(pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / pred.len() as f64)
}

/// Coefficient of determination `1 − SS_res / SS_tot`.
pub fn r2(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let ss_res: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Half the mean reference segment length, at least 1 and at most `n − 1`.
pub fn default_window_size(reference: &SegmentationVector) -> usize {
    let n = reference.len();
    let k = (n as f64 / (2.0 * reference.group_count() as f64)).round() as usize;
    k.max(1).min(n.saturating_sub(1))
}

/// WindowDiff: the fraction of probes `(i, i+k)`, `i = 0..n−k`, on which the
/// two segmentations disagree about how many boundaries fall in positions
/// `i+1..=i+k`. Bit 0 is never counted as a boundary.
pub fn window_diff(reference: &SegmentationVector, hypothesis: &SegmentationVector, k: Option<usize>) -> Result<f64> {
    let n = reference.len();
    if hypothesis.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: hypothesis.len(),
        });
    }
    let k = k.unwrap_or_else(|| default_window_size(reference).max(1));
    if k == 0 || k >= n {
        return Err(Error::DegenerateWindow { k, n });
    }
    let prefix = |s: &SegmentationVector| {
        let mut acc = 0i64;
        let mut out = Vec::with_capacity(n);
        out.push(0);
        for &b in &s.bits()[1..] {
            acc += i64::from(b);
            out.push(acc);
        }
        out
    };
    let (pr, ph) = (prefix(reference), prefix(hypothesis));
    let probes = n - k;
    let misses = (0..probes).filter(|&i| pr[i + k] - pr[i] != ph[i + k] - ph[i]).count();
    Ok(misses as f64 / probes as f64)
}

/// Mean metric per trained model: `grid[i][p]` is the metric of model `i`
/// evaluated on data generated with parameter `p`. Lower is better.
pub fn transferability(grid: &[Vec<f64>]) -> Result<Vec<f64>> {
    let cols = grid.first().map_or(0, Vec::len);
    if cols == 0 || grid.iter().any(|row| row.len() != cols) {
        return Err(Error::EmptyGrid);
    }
    Ok(grid.iter().map(|row| row.iter().sum::<f64>() / cols as f64).collect())
}

/// What one segmented sample contributes to a [`MetricReport`].
#[derive(Debug, Clone)]
pub struct SampleOutcome {
    pub probabilities: Vec<f64>,
    pub predicted: SegmentationVector,
    pub truth: SegmentationVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mse: f64,
    pub mae: f64,
    /// `None` when the pooled truth has zero variance.
    pub r2: Option<f64>,
    pub wd: f64,
    pub n: usize,
}

impl MetricReport {
    /// MSE, MAE and R² pool every position of every sample; WindowDiff is
    /// averaged per sample, skipping samples of length 1 (which have no probes).
    pub fn from_outcomes(outcomes: &[SampleOutcome]) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut pred = Vec::new();
        let mut truth = Vec::new();
        let mut wd_sum = 0.0;
        let mut wd_n = 0usize;
        for o in outcomes {
            if o.probabilities.len() != o.truth.len() {
                return Err(Error::LengthMismatch {
                    left: o.probabilities.len(),
                    right: o.truth.len(),
                });
            }
            pred.extend_from_slice(&o.probabilities);
            truth.extend(o.truth.to_f64());
            if o.truth.len() > 1 {
                wd_sum += window_diff(&o.truth, &o.predicted, None)?;
                wd_n += 1;
            }
        }
        let r2 = match r2(&pred, &truth) {
            Ok(v) => Some(v),
            Err(Error::ZeroVariance) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            mse: mse(&pred, &truth)?,
            mae: mae(&pred, &truth)?,
            r2,
            wd: if wd_n == 0 { 0.0 } else { wd_sum / wd_n as f64 },
            n: outcomes.len(),
        })
    }
}
