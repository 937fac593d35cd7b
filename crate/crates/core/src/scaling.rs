//! Three-parameter rescaling of correlation values onto the design scale.
//!
//! `f(r) = a·r + b·σ(ω·(50r − 25)) + (1 − a − b)/2`, where σ is the logistic
//! function. Every admissible parameter set fixes `f(0.5) = 0.5`, is
//! non-decreasing in `r`, and maps `[0, 1]` into `[0, 1]`.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const CONSTRAINT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    /// Weight of the linear term.
    pub a: f64,
    /// Weight of the sigmoid term.
    pub b: f64,
    /// Sigmoid steepness.
    pub omega: f64,
}

impl ScalingParams {
    /// Linear passthrough: `f(r) = r`.
    pub const IDENTITY: Self = Self {
        a: 1.0,
        b: 0.0,
        omega: 0.0,
    };

    pub fn new(a: f64, b: f64, omega: f64) -> Result<Self> {
        let p = Self { a, b, omega };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        let Self { a, b, omega } = *self;
        if !(a.is_finite() && b.is_finite() && omega.is_finite()) {
            return Err(Error::ParamConstraintViolated(format!(
                "non-finite parameter (a={a}, b={b}, omega={omega})"
            )));
        }
        if a < 0.0 || b < 0.0 {
            return Err(Error::ParamConstraintViolated(format!("a={a} and b={b} must be >= 0")));
        }
        if a + b > 1.0 + CONSTRAINT_SLACK {
            return Err(Error::ParamConstraintViolated(format!("a + b = {} exceeds 1", a + b)));
        }
        if !(0.0..=1.0).contains(&omega) {
            return Err(Error::ParamConstraintViolated(format!("omega={omega} outside [0, 1]")));
        }
        Ok(())
    }

    /// Evaluates the map for an already-checked parameter set.
    #[inline]
    pub fn apply(&self, r: f64) -> f64 {
        let sigmoid = 1.0 / (1.0 + (self.omega * (25.0 - 50.0 * r)).exp());
        let out = self.a * r + self.b * sigmoid + (1.0 - self.a - self.b) / 2.0;
        out.clamp(0.0, 1.0)
    }
}

impl Default for ScalingParams {
    fn default() -> Self {
        Self::IDENTITY
    }
}

pub fn rescale_value(r: f64, p: &ScalingParams) -> Result<f64> {
    p.check()?;
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InputOutOfRange(r));
    }
    Ok(p.apply(r))
}

/// Elementwise [`rescale_value`]; shape and symmetry are preserved.
pub fn rescale_matrix(m: ArrayView2<'_, f64>, p: &ScalingParams) -> Result<Array2<f64>> {
    p.check()?;
    if let Some(&bad) = m.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InputOutOfRange(bad));
    }
    Ok(m.mapv(|r| p.apply(r)))
}
