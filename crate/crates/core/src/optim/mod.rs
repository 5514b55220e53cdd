//! Step rules: averaged-gradient (Grad-Avg), plain SGD, heavy-ball momentum
//! and Nesterov accelerated gradient, plus the epoch loop that drives them.

mod run;
mod step;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::numcore::NumError;

pub use run::{run_epochs, BatchSchedule, EpochReport, Trainer, Trajectory};
pub use step::{grad_avg_step, momentum_step, nag_step, sgd_step, OptimizerState, StepReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OptimizerKind {
    GradAvg,
    Sgd,
    Momentum,
    Nag,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 4] = [
        OptimizerKind::GradAvg,
        OptimizerKind::Sgd,
        OptimizerKind::Momentum,
        OptimizerKind::Nag,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::GradAvg => "gradavg",
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Momentum => "momentum",
            OptimizerKind::Nag => "nag",
        }
    }

    pub fn has_velocity(self) -> bool {
        matches!(self, OptimizerKind::Momentum | OptimizerKind::Nag)
    }

    /// Gradient evaluations per step.
    pub fn grad_evals_per_step(self) -> u64 {
        match self {
            OptimizerKind::GradAvg => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = OptimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gradavg" | "grad-avg" | "grad_avg" => Ok(OptimizerKind::GradAvg),
            "sgd" => Ok(OptimizerKind::Sgd),
            "momentum" | "mom" => Ok(OptimizerKind::Momentum),
            "nag" | "nesterov" => Ok(OptimizerKind::Nag),
            _ => Err(OptimError::UnknownOptimizer(s.to_string())),
        }
    }
}

/// Learning rate `alpha` and momentum coefficient `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    alpha: f64,
    mu: f64,
}

impl Hyperparams {
    pub fn new(alpha: f64, mu: f64) -> Result<Self, OptimError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(OptimError::InvalidHyperparams(
                "learning rate must be finite and > 0",
            ));
        }
        if !(0.0..1.0).contains(&mu) {
            return Err(OptimError::InvalidHyperparams(
                "momentum must lie in [0, 1)",
            ));
        }
        Ok(Self { alpha, mu })
    }

    /// Learning rate only; momentum zero.
    pub fn lr(alpha: f64) -> Result<Self, OptimError> {
        Self::new(alpha, 0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// Where inside a step a non-finite value showed up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStage {
    Loss,
    Gradient,
    LookaheadGradient,
    Update,
}

impl fmt::Display for StepStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StepStage::Loss => "loss",
            StepStage::Gradient => "gradient",
            StepStage::LookaheadGradient => "lookahead gradient",
            StepStage::Update => "parameter update",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimError {
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(&'static str),

    #[error("unknown optimizer {0:?}")]
    UnknownOptimizer(String),

    #[error("mini-batch schedule needs an objective backed by samples")]
    NoSamples,

    #[error("diverged: non-finite {stage}")]
    Divergence { stage: StepStage },

    #[error(transparent)]
    Numeric(NumError),

    #[error("epoch {epoch}, batch {batch}: {source}")]
    At {
        epoch: usize,
        batch: usize,
        #[source]
        source: Box<OptimError>,
    },
}

impl OptimError {
    pub fn is_divergence(&self) -> bool {
        match self {
            OptimError::Divergence { .. } => true,
            OptimError::At { source, .. } => source.is_divergence(),
            _ => false,
        }
    }

    /// Epoch coordinate, when the error came out of the epoch loop.
    pub fn epoch(&self) -> Option<usize> {
        match self {
            OptimError::At { epoch, .. } => Some(*epoch),
            _ => None,
        }
    }

    pub(crate) fn from_num(e: NumError, stage: StepStage) -> Self {
        match e {
            NumError::NonFinite { .. } => OptimError::Divergence { stage },
            other => OptimError::Numeric(other),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperparams_validation() {
        assert!(Hyperparams::new(0.1, 0.9).is_ok());
        assert!(Hyperparams::new(0.0, 0.0).is_err());
        assert!(Hyperparams::new(-1.0, 0.0).is_err());
        assert!(Hyperparams::new(f64::NAN, 0.0).is_err());
        assert!(Hyperparams::new(0.1, 1.0).is_err());
        assert!(Hyperparams::new(0.1, -0.1).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in OptimizerKind::ALL {
            assert_eq!(k.name().parse::<OptimizerKind>().unwrap(), k);
        }
        assert!("adam".parse::<OptimizerKind>().is_err());
    }
}
