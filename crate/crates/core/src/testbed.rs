//! Analytic objectives with closed-form oracles.
//!
//! The closed forms here never call the optimizer step rules: diagonal
//! quadratics use per-eigenvalue factors raised to a power, general ones use
//! an explicitly formed iteration matrix raised by repeated squaring.

use log::warn;

use crate::numcore::{
    spd_max_eigenvalue, Batch, NumError, Objective, ParamVector, SeededRng, SymmetricMatrix,
};
use crate::optim::{grad_avg_step, Hyperparams, OptimError, StepStage};

/// Multiplier applied to grid-sampled Hessian norms when estimating `L`.
pub const LIPSCHITZ_SAFETY_FACTOR: f64 = 1.1;

/// Increases of `J` below this are treated as round-off, not violations.
pub const DESCENT_TOLERANCE: f64 = 1e-12;

/// `f(x) = ½ xᵀQx`, `∇f(x) = Qx`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    q: SymmetricMatrix,
}

impl QuadraticForm {
    pub fn new(q: SymmetricMatrix) -> Self {
        Self { q }
    }

    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.q
    }

    /// `max |λᵢ|`; exact for diagonal `Q`, power iteration otherwise.
    pub fn lipschitz(&self) -> Result<f64, NumError> {
        match self.q.diagonal() {
            Some(d) => Ok(d.iter().fold(0.0, |m, v| m.max(v.abs()))),
            None => spd_max_eigenvalue(&self.q, 1e-12),
        }
    }

    /// Diagonal `Q` with entries uniform on `[lo, hi)`.
    pub fn random_diagonal(rng: &mut SeededRng, dim: usize, lo: f64, hi: f64) -> Self {
        let d: Vec<f64> = (0..dim).map(|_| rng.uniform_range(lo, hi)).collect();
        Self::new(SymmetricMatrix::from_diagonal(&d).expect("finite diagonal"))
    }

    /// Dense PSD `Q = AᵀA / dim` with standard normal `A`.
    pub fn random_psd(rng: &mut SeededRng, dim: usize) -> Self {
        let a: Vec<f64> = (0..dim * dim).map(|_| rng.standard_normal()).collect();
        let mut q = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let s: f64 = (0..dim)
                    .map(|k| a[k * dim + i] * a[k * dim + j])
                    .sum::<f64>()
                    / dim as f64;
                q[i * dim + j] = s;
                q[j * dim + i] = s;
            }
        }
        Self::new(SymmetricMatrix::new(dim, q).expect("symmetric by construction"))
    }
}

impl Objective for QuadraticForm {
    fn dim(&self) -> usize {
        self.q.dim()
    }

    fn value(&self, x: &ParamVector, _: Batch<'_>) -> Result<f64, NumError> {
        Ok(0.5 * self.q.quadratic(x)?)
    }

    fn gradient(&self, x: &ParamVector, _: Batch<'_>) -> Result<ParamVector, NumError> {
        self.q.matvec(x)
    }
}

/// `f(x, y) = ½(x² − y²)`: a strict saddle at the origin.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SaddleSurface;

impl SaddleSurface {
    pub fn hessian(&self) -> SymmetricMatrix {
        SymmetricMatrix::from_diagonal(&[1.0, -1.0]).expect("constant")
    }
}

impl Objective for SaddleSurface {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, p: &ParamVector, _: Batch<'_>) -> Result<f64, NumError> {
        self.check_dim(p)?;
        let v = 0.5 * (p[0] * p[0] - p[1] * p[1]);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumError::NonFinite {
                context: "saddle value",
            })
        }
    }

    fn gradient(&self, p: &ParamVector, _: Batch<'_>) -> Result<ParamVector, NumError> {
        self.check_dim(p)?;
        ParamVector::new(vec![p[0], -p[1]])
    }
}

/// `f(x, y) = (a − x)² + b(y − x²)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rosenbrock {
    pub a: f64,
    pub b: f64,
}

impl Default for Rosenbrock {
    fn default() -> Self {
        Self { a: 1.0, b: 100.0 }
    }
}

impl Rosenbrock {
    pub fn minimizer(&self) -> [f64; 2] {
        [self.a, self.a * self.a]
    }

    pub fn hessian(&self, x: f64, y: f64) -> SymmetricMatrix {
        let b = self.b;
        let dxx = 2.0 - 4.0 * b * (y - x * x) + 8.0 * b * x * x;
        let dxy = -4.0 * b * x;
        SymmetricMatrix::from_rows(&[&[dxx, dxy], &[dxy, 2.0 * b]]).expect("symmetric")
    }

    /// Largest Hessian norm over an `n × n` grid on `[lo, hi]²`, times
    /// [`LIPSCHITZ_SAFETY_FACTOR`].
    pub fn lipschitz_on_box(&self, lo: f64, hi: f64, n: usize) -> Result<f64, NumError> {
        if n < 2 || lo.is_nan() || hi.is_nan() || hi <= lo {
            return Err(NumError::InvalidArgument("grid needs n >= 2 and hi > lo"));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (lo + i as f64 * step, lo + j as f64 * step);
                worst = worst.max(spd_max_eigenvalue(&self.hessian(x, y), 1e-10)?);
            }
        }
        Ok(LIPSCHITZ_SAFETY_FACTOR * worst)
    }
}

impl Objective for Rosenbrock {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, p: &ParamVector, _: Batch<'_>) -> Result<f64, NumError> {
        self.check_dim(p)?;
        let (x, y) = (p[0], p[1]);
        let v = (self.a - x).powi(2) + self.b * (y - x * x).powi(2);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumError::NonFinite {
                context: "rosenbrock value",
            })
        }
    }

    fn gradient(&self, p: &ParamVector, _: Batch<'_>) -> Result<ParamVector, NumError> {
        self.check_dim(p)?;
        let (x, y) = (p[0], p[1]);
        let r = y - x * x;
        ParamVector::new(vec![
            -2.0 * (self.a - x) - 4.0 * self.b * x * r,
            2.0 * self.b * r,
        ])
    }
}

/// Whether `alpha` lies in the GD convergence range `(0, 2/L)` for `q`.
pub fn step_size_in_range(q: &SymmetricMatrix, alpha: f64) -> Result<bool, NumError> {
    let l = QuadraticForm::new(q.clone()).lipschitz()?;
    Ok(alpha > 0.0 && alpha * l < 2.0)
}

/// Gradient-descent iterate after `t + 1` steps on `½xᵀQx`:
/// `Σᵢ (1 − αλᵢ)^{t+1} ⟨eᵢ, x₀⟩ eᵢ` for diagonal `Q`.
///
/// A step size outside `(0, 2/L)` is logged but still computed, so divergent
/// runs can be checked too.
pub fn gd_closed_form(
    q: &SymmetricMatrix,
    x0: &ParamVector,
    alpha: f64,
    t: usize,
) -> Result<ParamVector, NumError> {
    iterate_polynomial(q, x0, alpha, t, |a, l| 1.0 - a * l)
}

/// Grad-Avg iterate after `t + 1` steps on `½xᵀQx`:
/// `(I − αQ + (α²/2)Q²)^{t+1} x₀`.
pub fn grad_avg_closed_form(
    q: &SymmetricMatrix,
    x0: &ParamVector,
    alpha: f64,
    t: usize,
) -> Result<ParamVector, NumError> {
    iterate_polynomial(q, x0, alpha, t, |a, l| 1.0 - a * l + 0.5 * a * a * l * l)
}

fn iterate_polynomial(
    q: &SymmetricMatrix,
    x0: &ParamVector,
    alpha: f64,
    t: usize,
    factor: impl Fn(f64, f64) -> f64,
) -> Result<ParamVector, NumError> {
    if x0.len() != q.dim() {
        return Err(NumError::DimensionMismatch {
            expected: q.dim(),
            found: x0.len(),
        });
    }
    if !step_size_in_range(q, alpha)? {
        warn!("step size {alpha} outside (0, 2/L); closed form may diverge");
    }
    let power = i32::try_from(t + 1).map_err(|_| NumError::InvalidArgument("t too large"))?;

    if let Some(diag) = q.diagonal() {
        let out = diag
            .iter()
            .zip(x0.iter())
            .map(|(&lambda, &x)| factor(alpha, lambda).powi(power) * x)
            .collect();
        return ParamVector::new(out);
    }

    // General Q: M = p(Q) formed explicitly, then M^{t+1} by squaring.
    let n = q.dim();
    let identity = Dense::identity(n);
    let qm = Dense::from_symmetric(q);
    let q2 = qm.mul(&qm);
    // Recover the polynomial coefficients c0 + c1·λ + c2·λ² from `factor`.
    let c0 = factor(alpha, 0.0);
    let f1 = factor(alpha, 1.0);
    let fm1 = factor(alpha, -1.0);
    let c1 = 0.5 * (f1 - fm1);
    let c2 = 0.5 * (f1 + fm1) - c0;
    let m = identity
        .scaled(c0)
        .plus(&qm.scaled(c1))
        .plus(&q2.scaled(c2));
    let mp = m.pow(t as u64 + 1);
    ParamVector::new(mp.apply(x0.as_slice()))
}

#[derive(Debug, Clone)]
struct Dense {
    n: usize,
    a: Vec<f64>,
}

impl Dense {
    fn identity(n: usize) -> Self {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 1.0;
        }
        Self { n, a }
    }

    fn from_symmetric(q: &SymmetricMatrix) -> Self {
        let n = q.dim();
        let a = (0..n).flat_map(|i| q.row(i).to_vec()).collect();
        Self { n, a }
    }

    fn scaled(&self, s: f64) -> Self {
        Self {
            n: self.n,
            a: self.a.iter().map(|v| v * s).collect(),
        }
    }

    fn plus(&self, o: &Dense) -> Self {
        Self {
            n: self.n,
            a: self.a.iter().zip(&o.a).map(|(x, y)| x + y).collect(),
        }
    }

    fn mul(&self, o: &Dense) -> Self {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let v = self.a[i * n + k];
                for j in 0..n {
                    a[i * n + j] += v * o.a[k * n + j];
                }
            }
        }
        Self { n, a }
    }

    fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Dense::identity(self.n);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| self.a[i * n + j] * x[j]).sum())
            .collect()
    }
}

/// One step at which the objective went up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    /// `J(θ_{index+1}) > J(θ_index)`.
    pub index: usize,
    pub increase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentReport {
    pub alpha: f64,
    /// `J(θ₀), J(θ₁), …`.
    pub values: Vec<f64>,
    /// Increases larger than `tolerance`.
    pub violations: Vec<Violation>,
    pub tolerance: f64,
}

impl DescentReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn worst_increase(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Runs full-batch Grad-Avg with `α = 1/(3L)` and records every step where
/// `J` increased.
pub fn descent_certificate<O: Objective + ?Sized>(
    obj: &O,
    lipschitz: f64,
    theta0: &ParamVector,
    steps: usize,
) -> Result<DescentReport, OptimError> {
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(OptimError::InvalidHyperparams(
            "Lipschitz constant must be > 0",
        ));
    }
    descent_certificate_with_alpha(obj, 1.0 / (3.0 * lipschitz), theta0, steps)
}

/// [`descent_certificate`] with an explicit step size.
pub fn descent_certificate_with_alpha<O: Objective + ?Sized>(
    obj: &O,
    alpha: f64,
    theta0: &ParamVector,
    steps: usize,
) -> Result<DescentReport, OptimError> {
    let h = Hyperparams::lr(alpha)?;
    let value = |t: &ParamVector| {
        obj.value(t, Batch::Full)
            .map_err(|e| OptimError::from_num(e, StepStage::Loss))
            .and_then(|v| {
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(OptimError::Divergence {
                        stage: StepStage::Loss,
                    })
                }
            })
    };

    let mut theta = theta0.clone();
    let mut values = Vec::with_capacity(steps + 1);
    values.push(value(&theta)?);
    let mut violations = Vec::new();
    for n in 0..steps {
        theta = grad_avg_step(&theta, obj, Batch::Full, h).map_err(|e| OptimError::At {
            epoch: n + 1,
            batch: 0,
            source: Box::new(e),
        })?;
        let v = value(&theta)?;
        let increase = v - values[n];
        if increase > DESCENT_TOLERANCE {
            violations.push(Violation { index: n, increase });
        }
        values.push(v);
    }
    Ok(DescentReport {
        alpha,
        values,
        violations,
        tolerance: DESCENT_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::{run_epochs, BatchSchedule, OptimizerKind, OptimizerState};

    fn pv(v: &[f64]) -> ParamVector {
        ParamVector::from_slice(v).unwrap()
    }

    fn diag(d: &[f64]) -> SymmetricMatrix {
        SymmetricMatrix::from_diagonal(d).unwrap()
    }

    fn rel_close(a: &ParamVector, b: &ParamVector, tol: f64) -> bool {
        a.iter()
            .zip(b.iter())
            .all(|(x, y)| (x - y).abs() <= tol * x.abs().max(y.abs()).max(f64::MIN_POSITIVE))
    }

    #[test]
    fn gd_closed_form_examples() {
        let r = gd_closed_form(&diag(&[1.0, 2.0]), &pv(&[1.0, 1.0]), 0.1, 0).unwrap();
        assert!((r[0] - 0.9).abs() < 1e-15 && (r[1] - 0.8).abs() < 1e-15);
        let z = gd_closed_form(&diag(&[1.0, 2.0]), &pv(&[0.0, 0.0]), 0.1, 7).unwrap();
        assert!(z.is_zero());
        let i = gd_closed_form(
            &SymmetricMatrix::identity(3),
            &pv(&[4.0, -1.0, 2.0]),
            1.0,
            0,
        )
        .unwrap();
        assert!(i.is_zero());
    }

    #[test]
    fn grad_avg_closed_form_examples() {
        let r = grad_avg_closed_form(&diag(&[1.0, 2.0]), &pv(&[1.0, 1.0]), 0.1, 0).unwrap();
        assert!((r[0] - 0.905).abs() < 1e-15 && (r[1] - 0.82).abs() < 1e-15);
        assert!(
            grad_avg_closed_form(&diag(&[1.0, 2.0]), &pv(&[0.0, 0.0]), 0.1, 3)
                .unwrap()
                .is_zero()
        );
        let s = grad_avg_closed_form(&diag(&[1.0]), &pv(&[1.0]), 1.0 / 3.0, 0).unwrap();
        assert!((s[0] - 13.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn dense_route_agrees_with_diagonal_route() {
        // Rotate diag(1, 3) by 45°: [[2, 1], [1, 2]] has eigenvalues 1 and 3.
        let q = SymmetricMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let x0 = pv(&[1.0, 0.0]);
        let (a, t) = (0.2, 9);
        // x0 = (u₁ + u₃)/√2 with u₁ = (1, −1)/√2, u₃ = (1, 1)/√2.
        let f = |l: f64| (1.0 - a * l + 0.5 * a * a * l * l).powi(t as i32 + 1);
        let (f1, f3) = (f(1.0), f(3.0));
        let expected = pv(&[0.5 * (f1 + f3), 0.5 * (f3 - f1)]);
        let got = grad_avg_closed_form(&q, &x0, a, t).unwrap();
        assert!(rel_close(&got, &expected, 1e-12), "{got:?} vs {expected:?}");
        let g = |l: f64| (1.0 - a * l).powi(t as i32 + 1);
        let expected = pv(&[0.5 * (g(1.0) + g(3.0)), 0.5 * (g(3.0) - g(1.0))]);
        let got = gd_closed_form(&q, &x0, a, t).unwrap();
        assert!(rel_close(&got, &expected, 1e-12));
    }

    #[test]
    fn run_epochs_matches_closed_forms() {
        let q = diag(&[1.0, 2.0]);
        let obj = QuadraticForm::new(q.clone());
        let x0 = pv(&[1.0, 1.0]);
        for (kind, oracle) in [
            (OptimizerKind::Sgd, gd_closed_form as fn(_, _, _, _) -> _),
            (OptimizerKind::GradAvg, grad_avg_closed_form),
        ] {
            let s = OptimizerState::new(kind, Hyperparams::lr(0.1).unwrap(), 2);
            let tr = run_epochs(
                x0.clone(),
                &obj,
                s,
                3,
                BatchSchedule::FullBatch,
                SeededRng::new(0),
            )
            .unwrap();
            for t in 1..=3 {
                let want = oracle(&q, &x0, 0.1, t - 1).unwrap();
                assert!(rel_close(&tr.snapshots[t], &want, 1e-12));
            }
        }
    }

    #[test]
    fn certificate_scalar_example() {
        let obj = QuadraticForm::new(diag(&[1.0]));
        let r = descent_certificate(&obj, 1.0, &pv(&[1.0]), 1).unwrap();
        assert!((r.alpha - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(r.values[0], 0.5);
        let expected = 0.5 * (13.0f64 / 18.0).powi(2);
        assert!((r.values[1] - expected).abs() < 1e-15);
        assert!((r.values[1] - 169.0 / 648.0).abs() < 1e-15);
        assert!(r.passed());
    }

    #[test]
    fn certificate_at_minimum_and_diag12() {
        let obj = QuadraticForm::new(diag(&[1.0, 2.0]));
        let r = descent_certificate(&obj, 2.0, &pv(&[0.0, 0.0]), 10).unwrap();
        assert!(r.passed());
        assert!(r.values.iter().all(|&v| v == 0.0));

        let x0 = pv(&[1.0, 1.0]);
        let r = descent_certificate(&obj, 2.0, &x0, 1000).unwrap();
        assert!(r.passed());
        for n in [0usize, 1, 10, 100, 999] {
            let x = grad_avg_closed_form(obj.matrix(), &x0, 1.0 / 6.0, n).unwrap();
            let j = obj.value(&x, Batch::Full).unwrap();
            assert!((r.values[n + 1] - j).abs() <= 1e-12 * j.max(f64::MIN_POSITIVE) + 1e-300);
        }
    }

    #[test]
    fn certificate_flags_oversized_step() {
        // αλ = 10: per-step factor 1 − 10 + 50 = 41.
        let obj = QuadraticForm::new(diag(&[1.0, 2.0]));
        let r = descent_certificate_with_alpha(&obj, 10.0 / 2.0, &pv(&[1.0, 1.0]), 5).unwrap();
        assert!(!r.passed());
        assert_eq!(r.violations.len(), 5);
    }

    #[test]
    fn rosenbrock_basics() {
        let r = Rosenbrock::default();
        let m = pv(&r.minimizer());
        assert_eq!(r.value(&m, Batch::Full).unwrap(), 0.0);
        assert!(r.gradient(&m, Batch::Full).unwrap().is_zero());
        // Hessian at the minimizer: [[802, -400], [-400, 200]].
        let h = r.hessian(1.0, 1.0);
        assert_eq!(
            (h.get(0, 0), h.get(0, 1), h.get(1, 1)),
            (802.0, -400.0, 200.0)
        );
        let l = r.lipschitz_on_box(-2.0, 2.0, 41).unwrap();
        assert!(l > 1.1 * 5600.0 && l < 1.1 * 6000.0, "{l}");
    }

    #[test]
    fn saddle_basics() {
        let s = SaddleSurface;
        assert!(s.gradient(&pv(&[0.0, 0.0]), Batch::Full).unwrap().is_zero());
        assert_eq!(s.hessian().diagonal().unwrap(), vec![1.0, -1.0]);
        let h = Hyperparams::lr(0.01).unwrap();
        let p = grad_avg_step(&pv(&[0.0, 0.0]), &s, Batch::Full, h).unwrap();
        assert!(p.is_zero());
    }
}
