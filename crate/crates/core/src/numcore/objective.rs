use super::{NumError, ParamVector};

/// Which samples an objective is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Batch<'a> {
    Full,
    Indices(&'a [usize]),
}

/// A differentiable objective `J` with gradient `∇J`.
///
/// Implementations must be pure: the same parameters and the same batch
/// always give bit-identical results.
pub trait Objective {
    fn dim(&self) -> usize;

    fn value(&self, theta: &ParamVector, batch: Batch<'_>) -> Result<f64, NumError>;

    fn gradient(&self, theta: &ParamVector, batch: Batch<'_>) -> Result<ParamVector, NumError>;

    fn value_and_gradient(
        &self,
        theta: &ParamVector,
        batch: Batch<'_>,
    ) -> Result<(f64, ParamVector), NumError> {
        Ok((self.value(theta, batch)?, self.gradient(theta, batch)?))
    }

    /// Number of samples mini-batches index into; `None` for objectives
    /// without a data set behind them.
    fn sample_count(&self) -> Option<usize> {
        None
    }

    fn check_dim(&self, theta: &ParamVector) -> Result<(), NumError> {
        if theta.len() != self.dim() {
            return Err(NumError::DimensionMismatch {
                expected: self.dim(),
                found: theta.len(),
            });
        }
        Ok(())
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn value(&self, theta: &ParamVector, batch: Batch<'_>) -> Result<f64, NumError> {
        (**self).value(theta, batch)
    }

    fn gradient(&self, theta: &ParamVector, batch: Batch<'_>) -> Result<ParamVector, NumError> {
        (**self).gradient(theta, batch)
    }

    fn value_and_gradient(
        &self,
        theta: &ParamVector,
        batch: Batch<'_>,
    ) -> Result<(f64, ParamVector), NumError> {
        (**self).value_and_gradient(theta, batch)
    }

    fn sample_count(&self) -> Option<usize> {
        (**self).sample_count()
    }
}
