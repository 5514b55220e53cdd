use crate::numcore::{Batch, Objective, ParamVector};

use super::{Hyperparams, OptimError, OptimizerKind, StepStage};

/// Mutable per-run optimizer state. Only momentum and NAG carry a velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    kind: OptimizerKind,
    hyper: Hyperparams,
    velocity: Option<ParamVector>,
}

/// Result of one step: new parameters, the batch loss at the old parameters,
/// and how many gradients were evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub theta: ParamVector,
    pub loss: f64,
    pub grad_evals: u64,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, hyper: Hyperparams, dim: usize) -> Self {
        let velocity = kind.has_velocity().then(|| ParamVector::zeros(dim));
        Self {
            kind,
            hyper,
            velocity,
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn hyper(&self) -> Hyperparams {
        self.hyper
    }

    pub fn velocity(&self) -> Option<&ParamVector> {
        self.velocity.as_ref()
    }

    /// One step of this state's rule on a fixed batch.
    pub fn step<O: Objective + ?Sized>(
        &mut self,
        theta: &ParamVector,
        obj: &O,
        batch: Batch<'_>,
    ) -> Result<StepReport, OptimError> {
        check_dim(theta, obj)?;
        match self.kind {
            OptimizerKind::GradAvg => grad_avg(theta, obj, batch, self.hyper),
            OptimizerKind::Sgd => sgd(theta, obj, batch, self.hyper),
            OptimizerKind::Momentum => {
                momentum(theta, obj, batch, self.hyper, self.velocity_mut(theta))
            }
            OptimizerKind::Nag => nag(theta, obj, batch, self.hyper, self.velocity_mut(theta)),
        }
    }

    fn velocity_mut(&mut self, theta: &ParamVector) -> &mut ParamVector {
        let v = self
            .velocity
            .get_or_insert_with(|| ParamVector::zeros(theta.len()));
        if v.len() != theta.len() {
            *v = ParamVector::zeros(theta.len());
        }
        v
    }
}

/// `θ̄ = θ − α∇J(θ)`, then `θ − α·½(∇J(θ) + ∇J(θ̄))`, both gradients on `batch`.
pub fn grad_avg_step<O: Objective + ?Sized>(
    theta: &ParamVector,
    obj: &O,
    batch: Batch<'_>,
    h: Hyperparams,
) -> Result<ParamVector, OptimError> {
    check_dim(theta, obj)?;
    grad_avg(theta, obj, batch, h).map(|r| r.theta)
}

/// `θ − α∇J(θ)`.
pub fn sgd_step<O: Objective + ?Sized>(
    theta: &ParamVector,
    obj: &O,
    batch: Batch<'_>,
    h: Hyperparams,
) -> Result<ParamVector, OptimError> {
    check_dim(theta, obj)?;
    sgd(theta, obj, batch, h).map(|r| r.theta)
}

/// Heavy ball: `v ← μv − α∇J(θ)`, `θ ← θ + v`.
pub fn momentum_step<O: Objective + ?Sized>(
    theta: &ParamVector,
    obj: &O,
    batch: Batch<'_>,
    state: &mut OptimizerState,
) -> Result<ParamVector, OptimError> {
    check_dim(theta, obj)?;
    let h = state.hyper;
    momentum(theta, obj, batch, h, state.velocity_mut(theta)).map(|r| r.theta)
}

/// Nesterov: `v ← μv − α∇J(θ + μv)`, `θ ← θ + v`.
pub fn nag_step<O: Objective + ?Sized>(
    theta: &ParamVector,
    obj: &O,
    batch: Batch<'_>,
    state: &mut OptimizerState,
) -> Result<ParamVector, OptimError> {
    check_dim(theta, obj)?;
    let h = state.hyper;
    nag(theta, obj, batch, h, state.velocity_mut(theta)).map(|r| r.theta)
}

fn grad_avg<O: Objective + ?Sized>(
    theta: &ParamVector,
    obj: &O,
    batch: Batch<'_>,
    h: Hyperparams,
) -> Result<StepReport, OptimError> {
    let (loss, g) = value_and_gradient(obj, theta, batch, StepStage::Gradient)?;
    let alpha = h.alpha();
    let probe = theta
        .add_scaled(-alpha, &g)
        .map_err(|e| OptimError::from_num(e, StepStage::Update))?;
    let g_probe = obj
        .gradient(&probe, batch)
        .map_err(|e| OptimError::from_num(e, StepStage::LookaheadGradient))?;
    let avg = g
        .add_scaled(1.0, &g_probe)
        .and_then(|s| s.scale(0.5))
        .map_err(|e| OptimError::from_num(e, StepStage::Update))?;
    let next = theta
        .add_scaled(-alpha, &avg)
        .map_err(|e| OptimError::from_num(e, StepStage::Update))?;
    Ok(StepReport {
        theta: next,
        loss,
        grad_evals: 2,
    })
}

fn sgd<O: Objective + ?Sized>(
    theta: &ParamVector,
    obj: &O,
    batch: Batch<'_>,
    h: Hyperparams,
) -> Result<StepReport, OptimError> {
    let (loss, g) = value_and_gradient(obj, theta, batch, StepStage::Gradient)?;
    let next = theta
        .add_scaled(-h.alpha(), &g)
        .map_err(|e| OptimError::from_num(e, StepStage::Update))?;
    Ok(StepReport {
        theta: next,
        loss,
        grad_evals: 1,
    })
}

fn momentum<O: Objective + ?Sized>(
    theta: &ParamVector,
    obj: &O,
    batch: Batch<'_>,
    h: Hyperparams,
    velocity: &mut ParamVector,
) -> Result<StepReport, OptimError> {
    let (loss, g) = value_and_gradient(obj, theta, batch, StepStage::Gradient)?;
    let v = velocity_update(velocity, &g, h)?;
    let next = theta
        .add_scaled(1.0, &v)
        .map_err(|e| OptimError::from_num(e, StepStage::Update))?;
    *velocity = v;
    Ok(StepReport {
        theta: next,
        loss,
        grad_evals: 1,
    })
}

fn nag<O: Objective + ?Sized>(
    theta: &ParamVector,
    obj: &O,
    batch: Batch<'_>,
    h: Hyperparams,
    velocity: &mut ParamVector,
) -> Result<StepReport, OptimError> {
    let (loss, g) = if velocity.is_zero() {
        value_and_gradient(obj, theta, batch, StepStage::Gradient)?
    } else {
        let lookahead = theta
            .add_scaled(h.mu(), velocity)
            .map_err(|e| OptimError::from_num(e, StepStage::Update))?;
        let loss = obj
            .value(theta, batch)
            .map_err(|e| OptimError::from_num(e, StepStage::Loss))?;
        let g = obj
            .gradient(&lookahead, batch)
            .map_err(|e| OptimError::from_num(e, StepStage::LookaheadGradient))?;
        (checked_loss(loss)?, g)
    };
    let v = velocity_update(velocity, &g, h)?;
    let next = theta
        .add_scaled(1.0, &v)
        .map_err(|e| OptimError::from_num(e, StepStage::Update))?;
    *velocity = v;
    Ok(StepReport {
        theta: next,
        loss,
        grad_evals: 1,
    })
}

fn velocity_update(
    velocity: &ParamVector,
    g: &ParamVector,
    h: Hyperparams,
) -> Result<ParamVector, OptimError> {
    velocity
        .scale(h.mu())
        .and_then(|mv| mv.add_scaled(-h.alpha(), g))
        .map_err(|e| OptimError::from_num(e, StepStage::Update))
}

fn value_and_gradient<O: Objective + ?Sized>(
    obj: &O,
    theta: &ParamVector,
    batch: Batch<'_>,
    stage: StepStage,
) -> Result<(f64, ParamVector), OptimError> {
    let (loss, g) = obj
        .value_and_gradient(theta, batch)
        .map_err(|e| OptimError::from_num(e, stage))?;
    Ok((checked_loss(loss)?, g))
}

fn checked_loss(loss: f64) -> Result<f64, OptimError> {
    if loss.is_finite() {
        Ok(loss)
    } else {
        Err(OptimError::Divergence {
            stage: StepStage::Loss,
        })
    }
}

fn check_dim<O: Objective + ?Sized>(theta: &ParamVector, obj: &O) -> Result<(), OptimError> {
    obj.check_dim(theta).map_err(OptimError::Numeric)
}
