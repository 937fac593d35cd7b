//! Text file formats: matrix files, dataset files and segmentation output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cosenet::matrix::SegmentationVector;
use cosenet::synth::{SynthRecord, SynthSpec};
use cosenet::CorrelationMatrix;
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DATASET_EXTENSION: &str = "dat";
pub const SPLITS: [&str; 3] = ["train", "validation", "test"];
pub const DATASET_MANIFEST: &str = "manifest.json";

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn join<T: std::fmt::Display>(values: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{v}").expect("writing to a String");
    }
    out
}

fn parse_floats(text: &str, what: impl Fn() -> String) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<f64>()
                .map_err(|_| CliError::Validation(format!("{}: cannot parse {tok:?} as a number", what())))
        })
        .collect()
}

/// Rows as comma-separated decimals; `f64` Display is shortest round-trip.
pub fn format_matrix(m: ArrayView2<'_, f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        out.push_str(&join(row.iter()));
        out.push('\n');
    }
    out
}

/// Parses a matrix file; blank lines and lines starting with `#` are ignored.
pub fn parse_matrix(text: &str, origin: &Path) -> CliResult<CorrelationMatrix> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        rows.push(parse_floats(line, || format!("{}:{}", origin.display(), lineno + 1))?);
    }
    CorrelationMatrix::from_rows(&rows).map_err(|e| CliError::lib(origin, e))
}

pub fn read_matrix(path: &Path) -> CliResult<CorrelationMatrix> {
    parse_matrix(&read_text(path)?, path)
}

pub fn format_record(rec: &SynthRecord) -> String {
    format!(
        "{}|{}",
        join(rec.matrix.values().iter()),
        join(rec.segmentation.to_u8())
    )
}

pub fn parse_record(line: &str, origin: impl Fn() -> String) -> CliResult<SynthRecord> {
    let (values, bits) = line
        .split_once('|')
        .ok_or_else(|| CliError::Validation(format!("{}: missing '|' separator", origin())))?;
    let bits = parse_floats(bits, &origin)?;
    let bits: Vec<bool> = bits
        .iter()
        .map(|&b| {
            if b == 0.0 || b == 1.0 {
                Ok(b == 1.0)
            } else {
                Err(CliError::Validation(format!(
                    "{}: segmentation bit {b} is not 0 or 1",
                    origin()
                )))
            }
        })
        .collect::<CliResult<_>>()?;
    let n = bits.len();
    let values = parse_floats(values, &origin)?;
    if values.len() != n * n {
        return Err(CliError::Validation(format!(
            "{}: {} matrix values for a segmentation of length {n} (expected {})",
            origin(),
            values.len(),
            n * n
        )));
    }
    let wrap = |e: cosenet::Error| CliError::Validation(format!("{}: {e}", origin()));
    let matrix = Array2::from_shape_vec((n, n), values).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(SynthRecord {
        matrix: CorrelationMatrix::new(matrix).map_err(wrap)?,
        segmentation: SegmentationVector::new(bits).map_err(wrap)?,
    })
}

pub fn format_dataset_file(records: &[SynthRecord]) -> String {
    let mut out = String::new();
    for rec in records {
        out.push_str(&format_record(rec));
        out.push('\n');
    }
    out
}

pub fn read_dataset_file(path: &Path) -> CliResult<Vec<SynthRecord>> {
    let text = read_text(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| parse_record(l, || format!("{}:{}", path.display(), i + 1)))
        .collect()
}

pub fn split_path(dir: &Path, split: &str) -> PathBuf {
    dir.join(format!("{split}.{DATASET_EXTENSION}"))
}

/// A dataset directory as written by `synth`.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub size: usize,
    /// Generation parameters, when the directory carries a manifest.
    pub spec: Option<SynthSpec>,
    pub train: Vec<SynthRecord>,
    pub validation: Vec<SynthRecord>,
    pub test: Vec<SynthRecord>,
}

impl Dataset {
    pub fn split(&self, name: &str) -> &[SynthRecord] {
        match name {
            "train" => &self.train,
            "validation" => &self.validation,
            _ => &self.test,
        }
    }
}

pub fn read_dataset(dir: &Path) -> CliResult<Dataset> {
    let [train, validation, test] = SPLITS.map(|s| read_dataset_file(&split_path(dir, s)));
    let (train, validation, test) = (train?, validation?, test?);
    let mut sizes = train.iter().chain(&validation).chain(&test).map(|r| r.matrix.size());
    let size = sizes
        .next()
        .ok_or_else(|| CliError::Validation(format!("{}: dataset has no records", dir.display())))?;
    if sizes.any(|s| s != size) {
        return Err(CliError::Validation(format!(
            "{}: records have different sizes",
            dir.display()
        )));
    }
    let manifest = dir.join(DATASET_MANIFEST);
    let spec = if manifest.exists() {
        let value: serde_json::Value = serde_json::from_str(&read_text(&manifest)?)
            .map_err(|e| CliError::Validation(format!("{}: {e}", manifest.display())))?;
        value
            .get("parameters")
            .and_then(|p| serde_json::from_value(p.clone()).ok())
    } else {
        None
    };
    Ok(Dataset {
        size,
        spec,
        train,
        validation,
        test,
    })
}

/// Output document of `segment`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationOutput {
    pub segmentation: Vec<u8>,
    pub group_starts: Vec<usize>,
    pub probabilities: Vec<f64>,
    pub size: usize,
}

pub fn to_json_text<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    text
}
