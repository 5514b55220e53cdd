use crate::data::batch_indices;
use crate::numcore::{Batch, Objective, ParamVector, SeededRng};

use super::{OptimError, OptimizerState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchSchedule {
    /// One step per epoch on the whole objective.
    FullBatch,
    /// A fresh permutation per epoch, cut into batches of this size; the last
    /// partial batch is kept.
    MiniBatch { batch_size: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport {
    /// 1-based.
    pub epoch: usize,
    /// Unweighted mean of the batch losses seen during the epoch.
    pub mean_loss: f64,
    pub steps: usize,
    pub grad_evals: u64,
}

/// Drives an optimizer over epochs, one `run_epoch` call at a time.
pub struct Trainer<'a, O: Objective + ?Sized> {
    obj: &'a O,
    state: OptimizerState,
    schedule: BatchSchedule,
    rng: SeededRng,
    theta: ParamVector,
    epoch: usize,
    grad_evals: u64,
}

impl<'a, O: Objective + ?Sized> Trainer<'a, O> {
    pub fn new(
        theta0: ParamVector,
        obj: &'a O,
        state: OptimizerState,
        schedule: BatchSchedule,
        rng: SeededRng,
    ) -> Result<Self, OptimError> {
        obj.check_dim(&theta0).map_err(OptimError::Numeric)?;
        if let BatchSchedule::MiniBatch { batch_size } = schedule {
            if batch_size == 0 {
                return Err(OptimError::InvalidHyperparams("batch size must be >= 1"));
            }
            if obj.sample_count().is_none() {
                return Err(OptimError::NoSamples);
            }
        }
        Ok(Self {
            obj,
            state,
            schedule,
            rng,
            theta: theta0,
            epoch: 0,
            grad_evals: 0,
        })
    }

    pub fn theta(&self) -> &ParamVector {
        &self.theta
    }

    pub fn into_theta(self) -> ParamVector {
        self.theta
    }

    pub fn epochs_done(&self) -> usize {
        self.epoch
    }

    pub fn grad_evals(&self) -> u64 {
        self.grad_evals
    }

    pub fn state(&self) -> &OptimizerState {
        &self.state
    }

    pub fn run_epoch(&mut self) -> Result<EpochReport, OptimError> {
        let epoch = self.epoch + 1;
        let before = self.grad_evals;
        let mut loss_sum = 0.0;
        let mut steps = 0usize;

        match self.schedule {
            BatchSchedule::FullBatch => {
                self.apply(Batch::Full, epoch, 0, &mut loss_sum)?;
                steps = 1;
            }
            BatchSchedule::MiniBatch { batch_size } => {
                let n = self.obj.sample_count().ok_or(OptimError::NoSamples)?;
                let order = batch_indices(n, batch_size, &mut self.rng);
                for (b, idx) in order.iter().enumerate() {
                    self.apply(Batch::Indices(idx), epoch, b, &mut loss_sum)?;
                    steps += 1;
                }
            }
        }

        self.epoch = epoch;
        Ok(EpochReport {
            epoch,
            mean_loss: loss_sum / steps as f64,
            steps,
            grad_evals: self.grad_evals - before,
        })
    }

    fn apply(
        &mut self,
        batch: Batch<'_>,
        epoch: usize,
        index: usize,
        loss_sum: &mut f64,
    ) -> Result<(), OptimError> {
        let report = self
            .state
            .step(&self.theta, self.obj, batch)
            .map_err(|e| OptimError::At {
                epoch,
                batch: index,
                source: Box::new(e),
            })?;
        self.grad_evals += report.grad_evals;
        *loss_sum += report.loss;
        self.theta = report.theta;
        Ok(())
    }
}

/// Per-epoch parameter snapshots, starting with the initial point.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<ParamVector>,
    pub epoch_losses: Vec<f64>,
    pub grad_evals: u64,
}

impl Trajectory {
    pub fn last(&self) -> &ParamVector {
        self.snapshots
            .last()
            .expect("trajectory holds the initial point")
    }
}

pub fn run_epochs<O: Objective + ?Sized>(
    theta0: ParamVector,
    obj: &O,
    state: OptimizerState,
    epochs: usize,
    schedule: BatchSchedule,
    rng: SeededRng,
) -> Result<Trajectory, OptimError> {
    let mut snapshots = Vec::with_capacity(epochs + 1);
    snapshots.push(theta0.clone());
    let mut trainer = Trainer::new(theta0, obj, state, schedule, rng)?;
    let mut epoch_losses = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        let report = trainer.run_epoch()?;
        epoch_losses.push(report.mean_loss);
        snapshots.push(trainer.theta().clone());
    }
    Ok(Trajectory {
        snapshots,
        epoch_losses,
        grad_evals: trainer.grad_evals(),
    })
}
