//! Dense Cholesky factorization for the ridge normal equations.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Relative pivot floor below which the system is reported singular.
const PIVOT_TOLERANCE: f64 = 1e-12;

/// Lower-triangular `L` with `L·Lᵀ = a`. `a` must be symmetric.
pub(crate) fn cholesky(a: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let scale = a
        .diag()
        .iter()
        .fold(0.0f64, |m, &d| m.max(d.abs()))
        .max(f64::MIN_POSITIVE);
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut diag = a[[j, j]];
        for k in 0..j {
            diag -= l[[j, k]] * l[[j, k]];
        }
        if diag.is_nan() || diag <= PIVOT_TOLERANCE * scale {
            return Err(Error::SingularSystem { column: j, pivot: diag });
        }
        let ljj = diag.sqrt();
        l[[j, j]] = ljj;
        for i in (j + 1)..n {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = sum / ljj;
        }
    }
    Ok(l)
}

/// Solves `a·X = b` for every column of `b`.
pub(crate) fn cholesky_solve(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let l = cholesky(a)?;
    let n = l.nrows();
    let mut x = b.to_owned();
    for mut col in x.columns_mut() {
        // forward: L y = b
        for i in 0..n {
            let mut sum = col[i];
            for k in 0..i {
                sum -= l[[i, k]] * col[k];
            }
            col[i] = sum / l[[i, i]];
        }
        // backward: Lᵀ x = y
        for i in (0..n).rev() {
            let mut sum = col[i];
            for k in (i + 1)..n {
                sum -= l[[k, i]] * col[k];
            }
            col[i] = sum / l[[i, i]];
        }
    }
    Ok(x)
}
