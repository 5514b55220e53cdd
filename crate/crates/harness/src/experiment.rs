use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use gradavg_core::data::{load_csv, load_idx, split_80_20, standardize, Dataset};
use gradavg_core::nn::{self, Activation, Architecture, InitStrategy, Loss, NetObjective};
use gradavg_core::numcore::norm2;
use gradavg_core::optim::{BatchSchedule, StepStage, Trainer};
use gradavg_core::testbed::{QuadraticForm, SaddleSurface};
use gradavg_core::{
    Batch, Hyperparams, NumError, Objective, OptimError, OptimizerKind, OptimizerState,
    ParamVector, SeededRng,
};
use log::{debug, info};
use rand::RngCore;

use crate::config::{ExperimentConfig, Task};
use crate::metrics::{MetricsWriter, RunRecord};
use crate::HarnessError;

/// RNG sub-streams derived from the run seed; each consumer owns one.
mod stream {
    pub const PROBLEM: u64 = 1;
    pub const INIT: u64 = 2;
    pub const BATCHES: u64 = 3;
    pub const SUBSET: u64 = 4;
    pub const SPLIT: u64 = 5;
}

/// Dimension and eigenvalue range of the quadratic task.
pub const QUADRATIC_DIM: usize = 10;
pub const QUADRATIC_EIGEN_RANGE: (f64, f64) = (0.1, 5.0);
pub const SADDLE_START: [f64; 2] = [1e-3, 1e-3];

/// Hidden width of the classification network.
pub const CLASSIFIER_HIDDEN: usize = 128;
pub const MNIST_CLASSES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    /// The loss, gradient or test metric went non-finite during this epoch.
    Diverged {
        epoch: usize,
    },
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunStatus::Completed => f.write_str("completed"),
            RunStatus::Diverged { epoch } => write!(f, "diverged diverged_epoch={epoch}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub optimizer: OptimizerKind,
    pub records: Vec<RunRecord>,
    /// Test metric at the initial parameters.
    pub initial_test_metric: f64,
    /// Test metric after the last completed epoch; the initial value when no
    /// epoch completed.
    pub final_test_metric: f64,
    pub grad_evals: u64,
    pub status: RunStatus,
    pub wall: Duration,
}

impl RunSummary {
    pub fn diverged(&self) -> bool {
        matches!(self.status, RunStatus::Diverged { .. })
    }

    /// `optimizer=… final_test_metric=… grad_evals=… status=… wall_ms=…`
    pub fn line(&self) -> String {
        format!(
            "optimizer={} final_test_metric={} grad_evals={} status={} wall_ms={}",
            self.optimizer,
            self.final_test_metric,
            self.grad_evals,
            self.status,
            self.wall.as_millis()
        )
    }
}

/// Everything a run needs besides the optimizer: the training objective, the
/// starting point and how to score a parameter vector.
enum Problem {
    Quadratic(QuadraticForm),
    Saddle,
    Regression {
        arch: Architecture,
        train: Dataset,
        test: Dataset,
    },
    Classification {
        arch: Architecture,
        train: Dataset,
        test: Dataset,
    },
}

impl Problem {
    fn build(cfg: &ExperimentConfig, root: &SeededRng) -> Result<Self, HarnessError> {
        match cfg.task {
            Task::Quadratic => Ok(Problem::Quadratic(quadratic_task(cfg.seed))),
            Task::Saddle => Ok(Problem::Saddle),
            Task::Regression => {
                let path = data_path(cfg)?;
                let target = match cfg.target_col {
                    Some(c) => c,
                    None => column_count(path)?.saturating_sub(1),
                };
                let ds = load_csv(path, target, cfg.header)?;
                let split_seed = root.substream(stream::SPLIT).next_u64();
                let split = standardize(&split_80_20(&ds, split_seed)?)?;
                let arch =
                    Architecture::new(&[ds.num_features(), 1], Activation::Identity, Loss::Mse)?;
                Ok(Problem::Regression {
                    arch,
                    train: split.train,
                    test: split.test,
                })
            }
            Task::Classification => {
                let dir = data_path(cfg)?;
                let train = load_idx(
                    &dir.join("train-images-idx3-ubyte"),
                    &dir.join("train-labels-idx1-ubyte"),
                )?;
                let test = load_idx(
                    &dir.join("t10k-images-idx3-ubyte"),
                    &dir.join("t10k-labels-idx1-ubyte"),
                )?;
                let (train, test) = match cfg.subset {
                    Some(n) => {
                        let mut rng = root.substream(stream::SUBSET);
                        let n_test = (n / 5).max(1);
                        (
                            train.shuffled_subset(n.min(train.len()), &mut rng)?,
                            test.shuffled_subset(n_test.min(test.len()), &mut rng)?,
                        )
                    }
                    None => (train, test),
                };
                let arch = Architecture::new(
                    &[train.num_features(), CLASSIFIER_HIDDEN, MNIST_CLASSES],
                    Activation::Relu,
                    Loss::SoftmaxCrossEntropy,
                )?;
                Ok(Problem::Classification { arch, train, test })
            }
        }
    }

    fn initial_point(&self, cfg: &ExperimentConfig, root: &SeededRng) -> ParamVector {
        match self {
            Problem::Quadratic(_) => ParamVector::new(vec![1.0; QUADRATIC_DIM]).expect("finite"),
            Problem::Saddle => ParamVector::from_slice(&SADDLE_START).expect("finite"),
            Problem::Regression { arch, .. } | Problem::Classification { arch, .. } => {
                let seed = root.substream(stream::INIT).next_u64();
                nn::init(
                    arch,
                    InitStrategy {
                        kind: cfg.init,
                        seed,
                    },
                )
                .params
            }
        }
    }

    fn objective(&self) -> Result<Box<dyn Objective + '_>, HarnessError> {
        Ok(match self {
            Problem::Quadratic(q) => Box::new(q),
            Problem::Saddle => Box::new(SaddleSurface),
            Problem::Regression { arch, train, .. }
            | Problem::Classification { arch, train, .. } => {
                Box::new(NetObjective::new(arch, train)?)
            }
        })
    }

    /// Norm of the iterate for the quadratic, `|y|` for the saddle, test MSE
    /// for regression and test accuracy for classification.
    fn test_metric(&self, theta: &ParamVector) -> Result<f64, NumError> {
        match self {
            Problem::Quadratic(_) => Ok(norm2(theta)),
            Problem::Saddle => Ok(theta[1].abs()),
            Problem::Regression { arch, test, .. } => nn::mean_squared_error(arch, theta, test),
            Problem::Classification { arch, test, .. } => nn::accuracy(arch, theta, test),
        }
    }

    /// Deterministic surfaces report `J(θ_t)` after the epoch; data tasks
    /// report the running mean of the epoch's batch losses.
    fn train_loss(
        &self,
        obj: &dyn Objective,
        theta: &ParamVector,
        epoch_mean: f64,
    ) -> Result<f64, NumError> {
        match self {
            Problem::Quadratic(_) | Problem::Saddle => obj.value(theta, Batch::Full),
            _ => Ok(epoch_mean),
        }
    }

    fn schedule(&self, cfg: &ExperimentConfig) -> BatchSchedule {
        match (self, cfg.batch_size) {
            (Problem::Quadratic(_) | Problem::Saddle, _) | (_, None) => BatchSchedule::FullBatch,
            (_, Some(batch_size)) => BatchSchedule::MiniBatch { batch_size },
        }
    }
}

/// The diagonal quadratic a `quadratic` run with this seed trains on.
pub fn quadratic_task(seed: u64) -> QuadraticForm {
    let mut rng = SeededRng::new(seed).substream(stream::PROBLEM);
    let (lo, hi) = QUADRATIC_EIGEN_RANGE;
    QuadraticForm::random_diagonal(&mut rng, QUADRATIC_DIM, lo, hi)
}

fn data_path(cfg: &ExperimentConfig) -> Result<&Path, HarnessError> {
    cfg.data
        .as_deref()
        .ok_or_else(|| HarnessError::Config(format!("{} needs --data", cfg.task)))
}

/// Field count of the first line, used to default the target to the last
/// column.
fn column_count(path: &Path) -> Result<usize, HarnessError> {
    let io = |source| HarnessError::Io {
        path: PathBuf::from(path),
        source,
    };
    let mut line = String::new();
    BufReader::new(File::open(path).map_err(io)?)
        .read_line(&mut line)
        .map_err(io)?;
    Ok(line.trim_end().split(',').count())
}

/// Trains per `cfg`, writing one metrics row per epoch to `cfg.out` when set.
///
/// Divergence is not an error: the run stops and the summary records the
/// epoch.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary, HarnessError> {
    cfg.validate()?;
    let start = Instant::now();
    let root = SeededRng::new(cfg.seed);
    let problem = Problem::build(cfg, &root)?;
    let theta0 = problem.initial_point(cfg, &root);
    let obj = problem.objective()?;
    let initial_test_metric = problem.test_metric(&theta0)?;

    let hyper = Hyperparams::new(cfg.alpha, cfg.mu)?;
    let state = OptimizerState::new(cfg.optimizer, hyper, obj.dim());
    let mut trainer = Trainer::new(
        theta0,
        obj.as_ref(),
        state,
        problem.schedule(cfg),
        root.substream(stream::BATCHES),
    )?;
    let mut writer = cfg.out.as_deref().map(MetricsWriter::create).transpose()?;

    let mut records = Vec::with_capacity(cfg.epochs);
    let mut status = RunStatus::Completed;
    for epoch in 1..=cfg.epochs {
        let record = match epoch_record(&mut trainer, &problem, obj.as_ref()) {
            Ok(r) => r,
            Err(e) if e.is_divergence() => {
                info!("{} diverged in epoch {epoch}: {e}", cfg.optimizer);
                status = RunStatus::Diverged { epoch };
                break;
            }
            Err(e) => return Err(e.into()),
        };
        debug!("{} epoch {epoch}: {record:?}", cfg.optimizer);
        if let Some(w) = writer.as_mut() {
            w.append(&record)?;
        }
        records.push(record);
    }

    Ok(RunSummary {
        optimizer: cfg.optimizer,
        initial_test_metric,
        final_test_metric: records
            .last()
            .map_or(initial_test_metric, |r| r.test_metric),
        records,
        grad_evals: trainer.grad_evals(),
        status,
        wall: start.elapsed(),
    })
}

fn finite(v: f64) -> Result<f64, NumError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NumError::NonFinite {
            context: "epoch metric",
        })
    }
}

/// Non-finite metrics count as divergence; anything else stays numeric.
fn diverged(e: NumError) -> OptimError {
    match e {
        NumError::NonFinite { .. } => OptimError::Divergence {
            stage: StepStage::Loss,
        },
        other => OptimError::Numeric(other),
    }
}

fn epoch_record(
    trainer: &mut Trainer<'_, dyn Objective + '_>,
    problem: &Problem,
    obj: &dyn Objective,
) -> Result<RunRecord, OptimError> {
    let report = trainer.run_epoch()?;
    let theta = trainer.theta();
    let train_loss = problem
        .train_loss(obj, theta, report.mean_loss)
        .and_then(finite);
    let test_metric = problem.test_metric(theta).and_then(finite);
    let (train_loss, test_metric) = (
        train_loss.map_err(diverged)?,
        test_metric.map_err(diverged)?,
    );
    Ok(RunRecord {
        epoch: report.epoch,
        train_loss,
        test_metric,
    })
}
