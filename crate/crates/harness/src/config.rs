use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use gradavg_core::nn::InitKind;
use gradavg_core::OptimizerKind;

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Regression,
    Classification,
    Quadratic,
    Saddle,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Regression => "regression",
            Task::Classification => "classification",
            Task::Quadratic => "quadratic",
            Task::Saddle => "saddle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// lr 5e-5, momentum 0.9, batch 50, 200 epochs.
    Regression,
    /// lr 0.01, momentum 0.9, batch 128, 50 epochs.
    Classification,
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "regression" => Ok(Preset::Regression),
            "classification" => Ok(Preset::Classification),
            other => Err(format!("unknown preset {other:?}")),
        }
    }
}

/// Default training-subset size for classification runs; the test subset is
/// a fifth of it.
pub const DEFAULT_SUBSET: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    pub optimizer: OptimizerKind,
    pub alpha: f64,
    pub mu: f64,
    /// `None` means full batch.
    pub batch_size: Option<usize>,
    pub epochs: usize,
    pub seed: u64,
    pub init: InitKind,
    /// CSV file (regression) or IDX directory (classification).
    pub data: Option<PathBuf>,
    /// 0-based target column; defaults to the last column.
    pub target_col: Option<usize>,
    pub header: bool,
    /// Training rows kept for classification; `None` uses every row.
    pub subset: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn preset(preset: Preset, optimizer: OptimizerKind) -> Self {
        match preset {
            Preset::Regression => Self {
                task: Task::Regression,
                optimizer,
                alpha: 5e-5,
                mu: 0.9,
                batch_size: Some(50),
                epochs: 200,
                seed: 0,
                init: InitKind::Normal,
                data: None,
                target_col: None,
                header: true,
                subset: None,
                out: None,
            },
            Preset::Classification => Self {
                task: Task::Classification,
                optimizer,
                alpha: 0.01,
                mu: 0.9,
                batch_size: Some(128),
                epochs: 50,
                seed: 0,
                init: InitKind::Normal,
                data: None,
                target_col: None,
                header: false,
                subset: Some(DEFAULT_SUBSET),
                out: None,
            },
        }
    }

    /// Full-batch run on a seeded random diagonal quadratic.
    pub fn quadratic(optimizer: OptimizerKind) -> Self {
        Self {
            task: Task::Quadratic,
            alpha: 0.1,
            batch_size: None,
            epochs: 100,
            subset: None,
            header: false,
            ..Self::preset(Preset::Regression, optimizer)
        }
    }

    /// Full-batch run on `½(x² − y²)` from `(1e-3, 1e-3)`.
    pub fn saddle(optimizer: OptimizerKind) -> Self {
        Self {
            task: Task::Saddle,
            alpha: 0.01,
            epochs: 10_000,
            ..Self::quadratic(optimizer)
        }
    }

    pub fn for_task(task: Task, optimizer: OptimizerKind) -> Self {
        match task {
            Task::Regression => Self::preset(Preset::Regression, optimizer),
            Task::Classification => Self::preset(Preset::Classification, optimizer),
            Task::Quadratic => Self::quadratic(optimizer),
            Task::Saddle => Self::saddle(optimizer),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("learning rate must be finite and > 0");
        }
        if !(0.0..1.0).contains(&self.mu) {
            return bad("momentum must lie in [0, 1)");
        }
        if self.batch_size == Some(0) {
            return bad("batch size must be >= 1");
        }
        if self.subset == Some(0) {
            return bad("subset must be >= 1");
        }
        if matches!(self.task, Task::Regression | Task::Classification) && self.data.is_none() {
            return bad("this task needs --data");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_published_hyperparameters() {
        let r = ExperimentConfig::preset(Preset::Regression, OptimizerKind::Sgd);
        assert_eq!(
            (r.alpha, r.mu, r.batch_size, r.epochs),
            (5e-5, 0.9, Some(50), 200)
        );
        let c = ExperimentConfig::preset(Preset::Classification, OptimizerKind::Sgd);
        assert_eq!(
            (c.alpha, c.mu, c.batch_size, c.epochs),
            (0.01, 0.9, Some(128), 50)
        );
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::quadratic(OptimizerKind::Nag);
        assert!(c.validate().is_ok());
        c.mu = 1.0;
        assert!(c.validate().is_err());
        let r = ExperimentConfig::preset(Preset::Regression, OptimizerKind::Sgd);
        assert!(r.validate().is_err(), "regression without data");
    }
}
