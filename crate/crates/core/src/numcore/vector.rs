use std::ops::Index;

use super::NumError;

/// Flat parameter (or gradient) vector.
///
/// Every vector produced by this crate holds only finite entries; operations
/// that would produce NaN or infinity fail with [`NumError::NonFinite`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self, NumError> {
        check_finite(&values, "parameter vector")?;
        Ok(Self(values))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn from_slice(values: &[f64]) -> Result<Self, NumError> {
        Self::new(values.to_vec())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    /// Returns `self + a * x`.
    pub fn add_scaled(&self, a: f64, x: &ParamVector) -> Result<ParamVector, NumError> {
        axpy(a, x, self)
    }

    pub fn scale(&self, a: f64) -> Result<ParamVector, NumError> {
        Self::new(self.0.iter().map(|v| a * v).collect())
    }

    pub fn sub(&self, other: &ParamVector) -> Result<ParamVector, NumError> {
        axpy(-1.0, other, self)
    }

    pub fn dot(&self, other: &ParamVector) -> Result<f64, NumError> {
        same_len(self, other)?;
        let d = self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum::<f64>();
        finite(d, "dot product")
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<usize> for ParamVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for ParamVector {
    type Error = NumError;

    fn try_from(values: Vec<f64>) -> Result<Self, NumError> {
        Self::new(values)
    }
}

impl AsRef<[f64]> for ParamVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// `a * x + y`, elementwise. Inputs are left untouched.
pub fn axpy(a: f64, x: &ParamVector, y: &ParamVector) -> Result<ParamVector, NumError> {
    if !a.is_finite() {
        return Err(NumError::NonFinite {
            context: "axpy scale",
        });
    }
    same_len(x, y)?;
    let out = x.0.iter().zip(&y.0).map(|(xi, yi)| a * xi + yi).collect();
    ParamVector::new(out).map_err(|_| NumError::NonFinite {
        context: "axpy result",
    })
}

/// Euclidean norm.
pub fn norm2(x: &ParamVector) -> f64 {
    // Scaled accumulation so large finite entries do not overflow.
    let scale = x.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let ss: f64 = x.0.iter().map(|v| (v / scale) * (v / scale)).sum();
    scale * ss.sqrt()
}

fn same_len(x: &ParamVector, y: &ParamVector) -> Result<(), NumError> {
    if x.len() != y.len() {
        return Err(NumError::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_finite(values: &[f64], context: &'static str) -> Result<(), NumError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(NumError::NonFinite { context })
    }
}

pub(crate) fn finite(v: f64, context: &'static str) -> Result<f64, NumError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NumError::NonFinite { context })
    }
}
