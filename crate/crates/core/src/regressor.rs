//! Ridge regressor mapping a flattened `T×T` window to `T` group-start
//! probabilities.
//!
//! Training solves the regularized normal equations
//! `(XᵀX + λĨ)W = XᵀY` with a Cholesky factorization, where `Ĩ` is the
//! identity with the bias entry zeroed so the intercept is not shrunk.

use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formatting::{check_throughput, compute_layout, identity_pad, wocd_split};
use crate::linalg::cholesky_solve;
use crate::matrix::{CorrelationMatrix, ProbabilityVector, SegmentationVector};
use crate::synth::{SynthDataset, SynthRecord};

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_LAMBDA: f64 = 1.0;

/// Row-major flatten followed by a constant 1.0 bias feature.
pub fn flatten_window(w: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    let (rows, cols) = w.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let mut out = Vec::with_capacity(rows * cols + 1);
    out.extend(w.iter().copied());
    out.push(1.0);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRecord {
    pub window: Array2<f64>,
    /// Binary group-start targets, one per window position.
    pub target: Vec<f64>,
}

/// Provenance recorded in a trained model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub samples: usize,
    pub source_size: Option<usize>,
    pub noise_mean: Option<f64>,
    pub noise_var: Option<f64>,
    pub groups_mean: Option<f64>,
    pub groups_var: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub throughput: usize,
    pub split: Split,
    pub records: Vec<TrainingRecord>,
    pub meta: TrainingMeta,
}

impl TrainingSet {
    pub fn new(throughput: usize, split: Split, records: Vec<TrainingRecord>) -> Result<Self> {
        check_throughput(throughput)?;
        for (i, rec) in records.iter().enumerate() {
            if rec.window.dim() != (throughput, throughput) {
                return Err(Error::ShapeMismatch {
                    expected: throughput,
                    found: rec.window.nrows(),
                });
            }
            if rec.target.len() != throughput {
                return Err(Error::ShapeMismatch {
                    expected: throughput,
                    found: rec.target.len(),
                });
            }
            if let Some(position) = rec.target.iter().position(|&y| y != 0.0 && y != 1.0) {
                return Err(Error::NonBinaryTarget { record: i, position });
            }
        }
        let meta = TrainingMeta {
            samples: records.len(),
            ..TrainingMeta::default()
        };
        Ok(Self {
            throughput,
            split,
            records,
            meta,
        })
    }

    /// Cuts every (matrix, segmentation) pair into training windows.
    ///
    /// A matrix of size `T` yields exactly one window (itself).
    pub fn from_records(records: &[SynthRecord], throughput: usize, split: Split) -> Result<Self> {
        let mut out = Vec::new();
        for rec in records {
            out.extend(windowed_records(&rec.matrix, &rec.segmentation, throughput)?);
        }
        Self::new(throughput, split, out)
    }

    /// Training windows for one split of a synthetic dataset, with provenance.
    pub fn from_dataset(data: &SynthDataset, throughput: usize, split: Split) -> Result<Self> {
        let records = match split {
            Split::Train => &data.train,
            Split::Validation => &data.validation,
            Split::Test => &data.test,
        };
        let mut ts = Self::from_records(records, throughput, split)?;
        ts.meta = TrainingMeta {
            samples: ts.records.len(),
            source_size: Some(data.spec.size),
            noise_mean: Some(data.spec.noise_mean),
            noise_var: Some(data.spec.noise_var),
            groups_mean: Some(data.spec.groups_mean),
            groups_var: Some(data.spec.groups_var),
            seed: Some(data.spec.seed),
        };
        Ok(ts)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Windows of one matrix paired with the ground-truth bits of their global
/// slice. Window-local position 0 is a boundary only if the global position
/// truly starts a group; padded positions are singleton groups.
pub fn windowed_records(
    matrix: &CorrelationMatrix,
    seg: &SegmentationVector,
    throughput: usize,
) -> Result<Vec<TrainingRecord>> {
    if seg.len() != matrix.size() {
        return Err(Error::LengthMismatch {
            left: matrix.size(),
            right: seg.len(),
        });
    }
    let layout = compute_layout(matrix.size(), throughput)?;
    let padded = identity_pad(matrix.values(), &layout)?;
    let batch = wocd_split(padded.view(), &layout)?;
    Ok(batch
        .windows
        .into_iter()
        .enumerate()
        .map(|(i, window)| {
            let start = layout.window_start(i);
            let target = (start..start + throughput)
                .map(|g| if g >= seg.len() || seg.get(g) { 1.0 } else { 0.0 })
                .collect();
            TrainingRecord { window, target }
        })
        .collect())
}

/// Per-feature mean and population standard deviation.
///
/// The trailing bias feature is stored as mean 0, std 1 and thus passes
/// through unchanged; zero-variance features get std 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn transform_in_place(&self, features: &mut [f64]) {
        for ((x, m), s) in features.iter_mut().zip(&self.means).zip(&self.stds) {
            *x = (*x - m) / s;
        }
    }
}

pub fn fit_standardizer(ts: &TrainingSet) -> Result<Standardizer> {
    if ts.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let (x, _) = design_matrix(ts, None)?;
    let d = x.ncols();
    let n = x.nrows() as f64;
    let mut means = x.mean_axis(Axis(0)).expect("non-empty").to_vec();
    let mut stds: Vec<f64> = x
        .axis_iter(Axis(1))
        .zip(&means)
        .map(|(col, &m)| (col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt())
        .collect();
    for s in stds.iter_mut() {
        // rounding-level spread counts as zero variance
        if *s <= 1e-12 {
            *s = 1.0;
        }
    }
    means[d - 1] = 0.0;
    stds[d - 1] = 1.0;
    Ok(Standardizer { means, stds })
}

/// Feature matrix `X` (n × (T²+1)) and target matrix `Y` (n × T).
pub fn design_matrix(ts: &TrainingSet, standardizer: Option<&Standardizer>) -> Result<(Array2<f64>, Array2<f64>)> {
    let t = ts.throughput;
    let d = t * t + 1;
    let n = ts.len();
    let mut x = Array2::<f64>::zeros((n, d));
    let mut y = Array2::<f64>::zeros((n, t));
    for (i, rec) in ts.records.iter().enumerate() {
        let mut f = flatten_window(rec.window.view())?;
        if let Some(s) = standardizer {
            s.transform_in_place(&mut f);
        }
        x.row_mut(i).assign(&ndarray::ArrayView1::from(&f));
        y.row_mut(i).assign(&ndarray::ArrayView1::from(&rec.target));
    }
    Ok((x, y))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    throughput: usize,
    /// (T²+1) × T; the last row holds the bias weights.
    weights: Array2<f64>,
    lambda: f64,
    standardizer: Option<Standardizer>,
    pub training_meta: TrainingMeta,
}

pub fn train_ridge(ts: &TrainingSet, lambda: f64, standardize: bool) -> Result<RidgeModel> {
    if ts.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidLambda(lambda));
    }
    let standardizer = if standardize { Some(fit_standardizer(ts)?) } else { None };
    let (x, y) = design_matrix(ts, standardizer.as_ref())?;
    let d = x.ncols();
    let mut gram = x.t().dot(&x);
    for i in 0..d - 1 {
        gram[[i, i]] += lambda;
    }
    let rhs = x.t().dot(&y);
    let weights = cholesky_solve(gram.view(), rhs.view())?;
    Ok(RidgeModel {
        throughput: ts.throughput,
        weights,
        lambda,
        standardizer,
        training_meta: ts.meta.clone(),
    })
}

impl RidgeModel {
    /// Assembles a model from explicit parts.
    pub fn from_parts(
        throughput: usize,
        weights: Array2<f64>,
        lambda: f64,
        standardizer: Option<Standardizer>,
    ) -> Result<Self> {
        check_throughput(throughput)?;
        let d = throughput * throughput + 1;
        if weights.dim() != (d, throughput) {
            return Err(Error::ShapeMismatch {
                expected: d * throughput,
                found: weights.len(),
            });
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidLambda(lambda));
        }
        if let Some(s) = &standardizer {
            if s.means.len() != d || s.stds.len() != d {
                return Err(Error::ShapeMismatch {
                    expected: d,
                    found: s.means.len().min(s.stds.len()),
                });
            }
            if s.stds.iter().any(|&v| v.is_nan() || v <= 0.0) {
                return Err(Error::MalformedModel("standard deviations must be positive".into()));
            }
        }
        Ok(Self {
            throughput,
            weights,
            lambda,
            standardizer,
            training_meta: TrainingMeta::default(),
        })
    }

    pub fn throughput(&self) -> usize {
        self.throughput
    }

    pub fn weights(&self) -> ArrayView2<'_, f64> {
        self.weights.view()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn standardizer(&self) -> Option<&Standardizer> {
        self.standardizer.as_ref()
    }

    /// Unclamped linear prediction.
    pub fn predict_raw(&self, w: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        let t = self.throughput;
        if w.dim() != (t, t) {
            return Err(Error::ShapeMismatch {
                expected: t,
                found: w.nrows(),
            });
        }
        let mut f = flatten_window(w)?;
        if let Some(s) = &self.standardizer {
            s.transform_in_place(&mut f);
        }
        let mut out = vec![0.0; t];
        for (xi, row) in f.iter().zip(self.weights.rows()) {
            if *xi != 0.0 {
                for (o, wij) in out.iter_mut().zip(row) {
                    *o += xi * wij;
                }
            }
        }
        Ok(out)
    }
}

/// Linear prediction clamped elementwise into `[0, 1]`.
pub fn predict(model: &RidgeModel, w: ArrayView2<'_, f64>) -> Result<ProbabilityVector> {
    ProbabilityVector::clamped(model.predict_raw(w)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    throughput: usize,
    lambda: f64,
    standardized: bool,
    means: Vec<f64>,
    stds: Vec<f64>,
    weights: Vec<f64>,
    training_meta: TrainingMeta,
}

/// Serializes a model as a JSON document. Floats use shortest round-trip
/// formatting, so loading reproduces every weight bit for bit.
pub fn model_to_json(model: &RidgeModel) -> Result<String> {
    let (means, stds) = match &model.standardizer {
        Some(s) => (s.means.clone(), s.stds.clone()),
        None => (Vec::new(), Vec::new()),
    };
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        throughput: model.throughput,
        lambda: model.lambda,
        standardized: model.standardizer.is_some(),
        means,
        stds,
        weights: model.weights.iter().copied().collect(),
        training_meta: model.training_meta.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    Ok(text)
}

pub fn model_from_json(text: &str) -> Result<RidgeModel> {
    let probe: serde_json::Value = serde_json::from_str(text)?;
    let version = probe
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::MalformedModel("missing format_version".into()))?;
    if version != u64::from(MODEL_FORMAT_VERSION) {
        return Err(Error::FormatVersionMismatch {
            expected: MODEL_FORMAT_VERSION,
            found: u32::try_from(version).unwrap_or(u32::MAX),
        });
    }
    let file: ModelFile = serde_json::from_value(probe)?;
    let d = file.throughput * file.throughput + 1;
    let weights =
        Array2::from_shape_vec((d, file.throughput), file.weights).map_err(|e| Error::MalformedModel(e.to_string()))?;
    let standardizer = file.standardized.then_some(Standardizer {
        means: file.means,
        stds: file.stds,
    });
    let mut model = RidgeModel::from_parts(file.throughput, weights, file.lambda, standardizer)?;
    model.training_meta = file.training_meta;
    Ok(model)
}

pub fn save_model(model: &RidgeModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model_to_json(model)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<RidgeModel> {
    model_from_json(&fs::read_to_string(path)?)
}
