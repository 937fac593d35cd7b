//! Input formatting: identity padding, overlapping diagonal windows and the
//! final trim back to the caller's matrix size.
//!
//! Windows of size `T` are copied along the diagonal every `T/2` elements, so
//! every interior index is seen by exactly two windows. The input is first
//! extended to `m0` elements, with padded elements correlated only with
//! themselves.

use ndarray::{s, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::matrix::SegmentationVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowLayout {
    /// Original matrix size.
    pub m_in: usize,
    /// Window size `T`.
    pub throughput: usize,
    /// Number of windows.
    pub v: usize,
    /// Padded size.
    pub m0: usize,
}

/// Checks that `t` is a usable throughput (even, at least 2).
pub fn check_throughput(t: usize) -> Result<()> {
    if t < 2 || !t.is_multiple_of(2) {
        return Err(Error::InvalidThroughput(t));
    }
    Ok(())
}

pub fn compute_layout(m_in: usize, t: usize) -> Result<WindowLayout> {
    check_throughput(t)?;
    if m_in == 0 {
        return Err(Error::EmptyInput);
    }
    let v = if m_in >= t { (2 * m_in).div_ceil(t) - 1 } else { 1 };
    let m0 = t * (v + 1) / 2;
    Ok(WindowLayout {
        m_in,
        throughput: t,
        v,
        m0,
    })
}

impl WindowLayout {
    pub fn half(&self) -> usize {
        self.throughput / 2
    }

    /// Global index of the first row/column of window `i`.
    pub fn window_start(&self, i: usize) -> usize {
        i * self.half()
    }

    /// Indices of the windows that cover global index `g`.
    pub fn covering_windows(&self, g: usize) -> std::ops::Range<usize> {
        // window i spans [i*h, (i+2)*h), so only i = q-1 and i = q can cover g
        let q = g / self.half();
        q.saturating_sub(1)..q.min(self.v - 1) + 1
    }
}

/// Embeds `r` in the top-left corner of an `m0×m0` identity matrix.
pub fn identity_pad(r: ArrayView2<'_, f64>, layout: &WindowLayout) -> Result<Array2<f64>> {
    let (rows, cols) = r.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows != layout.m_in {
        return Err(Error::LayoutMismatch {
            expected: layout.m_in,
            found: rows,
        });
    }
    let mut padded = Array2::eye(layout.m0);
    padded.slice_mut(s![..rows, ..rows]).assign(&r);
    Ok(padded)
}

/// `v` overlapping `T×T` copies taken along the diagonal of a padded matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowBatch {
    pub layout: WindowLayout,
    pub windows: Vec<Array2<f64>>,
}

pub fn wocd_split(padded: ArrayView2<'_, f64>, layout: &WindowLayout) -> Result<WindowBatch> {
    let (rows, cols) = padded.dim();
    if rows != layout.m0 || cols != layout.m0 {
        return Err(Error::LayoutMismatch {
            expected: layout.m0,
            found: rows.max(cols),
        });
    }
    let t = layout.throughput;
    let windows = (0..layout.v)
        .map(|i| {
            let start = layout.window_start(i);
            padded.slice(s![start..start + t, start..start + t]).to_owned()
        })
        .collect();
    Ok(WindowBatch {
        layout: *layout,
        windows,
    })
}

/// Keeps the first `m_in` bits of a padded-length segmentation.
pub fn trim_segmentation(s0: &SegmentationVector, layout: &WindowLayout) -> Result<SegmentationVector> {
    if s0.len() != layout.m0 {
        return Err(Error::LayoutMismatch {
            expected: layout.m0,
            found: s0.len(),
        });
    }
    SegmentationVector::forcing_start(s0.bits()[..layout.m_in].to_vec())
}
