//! Synthetic (matrix, segmentation) pairs for training and evaluation.
//!
//! A ground-truth segmentation is expanded to its block matrix, symmetric
//! Gaussian noise is added, values are clipped to `[0, 1]` and the diagonal
//! is reset to 1. Each sample draws from its own ChaCha stream derived from
//! `(seed, index)`, so datasets are reproducible and can be generated in
//! parallel.

use ndarray::Array2;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{segmentation_to_blocks, CorrelationMatrix, SegmentationVector};

pub const TRAIN_FRACTION: f64 = 0.7;
pub const VALIDATION_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub size: usize,
    pub noise_mean: f64,
    pub noise_var: f64,
    pub groups_mean: f64,
    pub groups_var: f64,
    pub count: usize,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(
        size: usize,
        noise_mean: f64,
        noise_var: f64,
        groups_mean: f64,
        groups_var: f64,
        count: usize,
        seed: u64,
    ) -> Self {
        Self {
            size,
            noise_mean,
            noise_var,
            groups_mean,
            groups_var,
            count,
            seed,
        }
    }

    /// Standard database parameters for sizes 8, 16 and 32 at noise
    /// variances 0.0 to 0.5 (step 0.1).
    pub fn preset(size: usize, noise_var: f64, count: usize, seed: u64) -> Option<Self> {
        let (groups_mean, groups_var) = match size {
            8 => (3.0, 1.0),
            16 => (4.0, 2.0),
            32 => (8.0, 2.0),
            _ => return None,
        };
        let step = (noise_var * 10.0).round();
        if (noise_var * 10.0 - step).abs() > 1e-9 || !(0.0..=5.0).contains(&step) {
            return None;
        }
        let noise_mean = match step as u32 {
            0 => 0.0,
            5 => 0.02,
            _ => 0.01,
        };
        Some(Self::new(
            size,
            noise_mean,
            noise_var,
            groups_mean,
            groups_var,
            count,
            seed,
        ))
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::InvalidConfig("size must be at least 1".into()));
        }
        if self.count == 0 {
            return Err(Error::InvalidConfig("count must be at least 1".into()));
        }
        for (name, v) in [("noise_var", self.noise_var), ("groups_var", self.groups_var)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [("noise_mean", self.noise_mean), ("groups_mean", self.groups_mean)] {
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    /// `(train, validation, test)` sizes: 70% / 20% rounded, remainder to test.
    pub fn split_sizes(&self) -> (usize, usize, usize) {
        split_sizes(self.count)
    }
}

pub fn split_sizes(count: usize) -> (usize, usize, usize) {
    let train = ((TRAIN_FRACTION * count as f64).round() as usize).min(count);
    let validation = ((VALIDATION_FRACTION * count as f64).round() as usize).min(count - train);
    (train, validation, count - train - validation)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthRecord {
    pub matrix: CorrelationMatrix,
    pub segmentation: SegmentationVector,
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub spec: SynthSpec,
    pub train: Vec<SynthRecord>,
    pub validation: Vec<SynthRecord>,
    pub test: Vec<SynthRecord>,
}

impl SynthDataset {
    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Draws a segmentation with `clamp(round(N(mean, √var)), 1, size)` groups;
/// interior boundaries are uniform without replacement over `1..size`.
pub fn sample_segmentation<R: Rng + ?Sized>(
    size: usize,
    groups_mean: f64,
    groups_var: f64,
    rng: &mut R,
) -> Result<SegmentationVector> {
    if size == 0 {
        return Err(Error::EmptyInput);
    }
    let normal = Normal::new(groups_mean, groups_var.sqrt())
        .map_err(|e| Error::InvalidConfig(format!("group distribution: {e}")))?;
    let draw = normal.sample(rng).round();
    let groups = if draw.is_nan() {
        1
    } else {
        draw.clamp(1.0, size as f64) as usize
    };
    let mut bits = vec![false; size];
    bits[0] = true;
    for i in index::sample(rng, size - 1, groups - 1) {
        bits[i + 1] = true;
    }
    SegmentationVector::new(bits)
}

/// Symmetric `N(mean, √var)` noise with a zero diagonal.
pub fn sample_noise<R: Rng + ?Sized>(size: usize, mean: f64, var: f64, rng: &mut R) -> Result<Array2<f64>> {
    let normal = Normal::new(mean, var.sqrt()).map_err(|e| Error::InvalidConfig(format!("noise distribution: {e}")))?;
    let mut noise = Array2::zeros((size, size));
    for i in 0..size {
        for j in (i + 1)..size {
            let e = normal.sample(rng);
            noise[[i, j]] = e;
            noise[[j, i]] = e;
        }
    }
    Ok(noise)
}

pub fn build_noisy_matrix<R: Rng + ?Sized>(
    seg: &SegmentationVector,
    noise_mean: f64,
    noise_var: f64,
    rng: &mut R,
) -> Result<CorrelationMatrix> {
    let mut m = segmentation_to_blocks(seg);
    if noise_var > 0.0 || noise_mean != 0.0 {
        m += &sample_noise(seg.len(), noise_mean, noise_var, rng)?;
        m.mapv_inplace(|v| v.clamp(0.0, 1.0));
    }
    m.diag_mut().fill(1.0);
    CorrelationMatrix::new(m)
}

/// RNG stream for sample `index` of a dataset seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn generate_record(spec: &SynthSpec, index: u64) -> Result<SynthRecord> {
    let mut rng = sample_rng(spec.seed, index);
    let segmentation = sample_segmentation(spec.size, spec.groups_mean, spec.groups_var, &mut rng)?;
    let matrix = build_noisy_matrix(&segmentation, spec.noise_mean, spec.noise_var, &mut rng)?;
    Ok(SynthRecord { matrix, segmentation })
}

pub fn generate_dataset(spec: &SynthSpec) -> Result<SynthDataset> {
    spec.validate()?;
    let mut records = (0..spec.count as u64)
        .into_par_iter()
        .map(|i| generate_record(spec, i))
        .collect::<Result<Vec<_>>>()?;
    let (train, validation, _) = spec.split_sizes();
    let test = records.split_off(train + validation);
    let validation = records.split_off(train);
    Ok(SynthDataset {
        spec: *spec,
        train: records,
        validation,
        test,
    })
}
