//! Core value types: correlation matrices, segmentation vectors and
//! per-position probability vectors.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Maximum tolerated `|v[i][j] - v[j][i]|`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-6;

/// A validated square, symmetric matrix with entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    values: Array2<f64>,
}

impl CorrelationMatrix {
    /// Validates `raw` without modifying it.
    pub fn new(raw: Array2<f64>) -> Result<Self> {
        validate(raw.view())?;
        Ok(Self { values: raw })
    }

    /// Builds a matrix from rows, rejecting ragged input as non-square.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let raw = Array2::from_shape_vec((n, n), flat).expect("shape checked above");
        Self::new(raw)
    }

    pub fn size(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[[row, col]]
    }
}

/// Checks the correlation-matrix invariants on a raw array.
pub fn validate(raw: ArrayView2<'_, f64>) -> Result<()> {
    let (rows, cols) = raw.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::EmptyMatrix);
    }
    for ((row, col), &value) in raw.indexed_iter() {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::ValueOutOfRange { row, col, value });
        }
    }
    let mut worst = (0, 0, 0.0f64);
    for i in 0..rows {
        for j in (i + 1)..cols {
            let diff = (raw[[i, j]] - raw[[j, i]]).abs();
            if diff > worst.2 {
                worst = (i, j, diff);
            }
        }
    }
    if worst.2 > SYMMETRY_TOLERANCE {
        return Err(Error::Asymmetric {
            row: worst.0,
            col: worst.1,
            diff: worst.2,
        });
    }
    Ok(())
}

/// Binary vector where a set bit marks the first element of a group.
///
/// Bit 0 is always set: the first element necessarily starts the first group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SegmentationVector {
    bits: Vec<bool>,
}

impl SegmentationVector {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        match bits.first() {
            None => Err(Error::InvalidSegmentation("empty vector".into())),
            Some(false) => Err(Error::InvalidSegmentation("bit 0 must be set".into())),
            Some(true) => Ok(Self { bits }),
        }
    }

    /// Like [`SegmentationVector::new`] but sets bit 0 instead of rejecting it.
    pub fn forcing_start(mut bits: Vec<bool>) -> Result<Self> {
        if let Some(first) = bits.first_mut() {
            *first = true;
        }
        Self::new(bits)
    }

    /// Parses 0/1 integers, forcing bit 0.
    pub fn from_u8(bits: &[u8]) -> Result<Self> {
        let mut out = Vec::with_capacity(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => out.push(false),
                1 => out.push(true),
                other => {
                    return Err(Error::InvalidSegmentation(format!(
                        "value {other} at index {i} is not binary"
                    )))
                }
            }
        }
        Self::forcing_start(out)
    }

    /// A single group spanning `len` elements.
    pub fn single_group(len: usize) -> Result<Self> {
        let mut bits = vec![false; len];
        if let Some(first) = bits.first_mut() {
            *first = true;
        }
        Self::new(bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, index: usize) -> bool {
        self.bits[index]
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| u8::from(b)).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }

    pub fn group_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Ascending indices of the set bits; the first is always 0.
    pub fn group_starts(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    /// Group id of every element (0-based, in order).
    pub fn group_labels(&self) -> Vec<usize> {
        let mut label = 0;
        self.bits
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                if b && i > 0 {
                    label += 1;
                }
                label
            })
            .collect()
    }
}

pub fn group_starts(seg: &SegmentationVector) -> Vec<usize> {
    seg.group_starts()
}

/// Expands a segmentation into its noise-free binary block matrix:
/// entry `(i, j)` is 1 iff `i` and `j` belong to the same group.
pub fn segmentation_to_blocks(seg: &SegmentationVector) -> Array2<f64> {
    let labels = seg.group_labels();
    let n = labels.len();
    Array2::from_shape_fn((n, n), |(i, j)| if labels[i] == labels[j] { 1.0 } else { 0.0 })
}

/// Reads group starts off a block matrix: element `i > 0` starts a group when
/// it is not linked to its predecessor (`m[i-1][i] < 0.5`).
pub fn segmentation_from_blocks(blocks: ArrayView2<'_, f64>) -> Result<SegmentationVector> {
    let (rows, cols) = blocks.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let bits = (0..rows).map(|i| i == 0 || blocks[[i - 1, i]] < 0.5).collect();
    SegmentationVector::new(bits)
}

/// Per-position probabilities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    probs: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (index, &value) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ProbabilityOutOfRange { index, value });
            }
        }
        Ok(Self { probs })
    }

    /// Clamps every entry into `[0, 1]`; NaN maps to 0.
    pub fn clamped(raw: Vec<f64>) -> Result<Self> {
        Self::new(
            raw.into_iter()
                .map(|p| if p.is_nan() { 0.0 } else { p.clamp(0.0, 1.0) })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn seg(bits: &[u8]) -> SegmentationVector {
        SegmentationVector::from_u8(bits).unwrap()
    }

    #[test]
    fn identity_is_valid() {
        let m = CorrelationMatrix::new(Array2::eye(2)).unwrap();
        assert_eq!(m.size(), 2);
    }

    #[test]
    fn asymmetric_rejected() {
        let err = CorrelationMatrix::new(array![[1.0, 0.5], [0.4, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::Asymmetric { row: 0, col: 1, .. }));
    }

    #[test]
    fn out_of_range_rejected() {
        let err = CorrelationMatrix::new(array![[1.0, 1.2], [1.2, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::ValueOutOfRange { row: 0, col: 1, .. }));
    }

    #[test]
    fn ragged_rows_not_square() {
        let err = CorrelationMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0]]).unwrap_err();
        assert!(matches!(err, Error::NotSquare { .. }));
        let err = CorrelationMatrix::new(Array2::zeros((2, 3))).unwrap_err();
        assert!(matches!(err, Error::NotSquare { rows: 2, cols: 3 }));
    }

    #[test]
    fn symmetry_within_tolerance_accepted() {
        let m = array![[1.0, 0.5], [0.5 + 5e-7, 1.0]];
        assert!(CorrelationMatrix::new(m).is_ok());
    }

    #[test]
    fn bit_zero_required() {
        assert!(SegmentationVector::new(vec![false, true]).is_err());
        assert!(SegmentationVector::new(vec![]).is_err());
        assert_eq!(
            SegmentationVector::forcing_start(vec![false, true]).unwrap().to_u8(),
            [1, 1]
        );
    }

    #[test]
    fn two_group_blocks() {
        let blocks = segmentation_to_blocks(&seg(&[1, 0, 0, 0, 1, 0, 0, 0]));
        for i in 0..8 {
            for j in 0..8 {
                let same = (i < 4) == (j < 4);
                assert_eq!(blocks[[i, j]], if same { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn all_boundaries_is_identity() {
        assert_eq!(segmentation_to_blocks(&seg(&[1, 1, 1])), Array2::<f64>::eye(3));
    }

    #[test]
    fn single_group_is_all_ones() {
        assert_eq!(segmentation_to_blocks(&seg(&[1, 0, 0])), Array2::<f64>::ones((3, 3)));
    }

    #[test]
    fn group_starts_examples() {
        assert_eq!(group_starts(&seg(&[1, 0, 0, 1, 0])), [0, 3]);
        assert_eq!(group_starts(&seg(&[1])), [0]);
        assert_eq!(group_starts(&seg(&[1, 1, 1, 1])), [0, 1, 2, 3]);
    }

    fn arb_seg() -> impl Strategy<Value = SegmentationVector> {
        prop::collection::vec(any::<bool>(), 1..=64).prop_map(|bits| SegmentationVector::forcing_start(bits).unwrap())
    }

    proptest! {
        #[test]
        fn blocks_round_trip(s in arb_seg()) {
            let blocks = segmentation_to_blocks(&s);
            prop_assert_eq!(segmentation_from_blocks(blocks.view()).unwrap(), s);
        }

        #[test]
        fn blocks_are_contiguous_diagonal_squares(s in arb_seg()) {
            let blocks = segmentation_to_blocks(&s);
            let n = s.len();
            prop_assert!(validate(blocks.view()).is_ok());
            for i in 0..n {
                prop_assert_eq!(blocks[[i, i]], 1.0);
            }
            let starts = s.group_starts();
            let mut expected = Array2::<f64>::zeros((n, n));
            for (g, &start) in starts.iter().enumerate() {
                let end = starts.get(g + 1).copied().unwrap_or(n);
                for i in start..end {
                    for j in start..end {
                        expected[[i, j]] = 1.0;
                    }
                }
            }
            prop_assert_eq!(blocks, expected);
        }
    }
}
