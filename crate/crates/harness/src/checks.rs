//! Property suites with measured worst-case values against fixed tolerances.

use std::fmt;
use std::str::FromStr;

use gradavg_core::nn::{init, Activation, Architecture, InitKind, InitStrategy, Loss};
use gradavg_core::numcore::norm2;
use gradavg_core::optim::{grad_avg_step, run_epochs, sgd_step, BatchSchedule};
use gradavg_core::testbed::{
    descent_certificate_with_alpha, gd_closed_form, grad_avg_closed_form, QuadraticForm,
    Rosenbrock, SaddleSurface, DESCENT_TOLERANCE,
};
use gradavg_core::{
    Batch, Hyperparams, Objective, OptimizerKind, OptimizerState, ParamVector, SeededRng,
    SymmetricMatrix,
};
use ndarray::Array2;

pub const ORACLE_REL_TOL: f64 = 1e-10;
pub const SLOPE_TOL: f64 = 0.05;
pub const GRADCHECK_STEP: f64 = 1e-6;
pub const GRADCHECK_REL_TOL: f64 = 1e-4;
pub const SADDLE_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Oracles,
    Descent,
    SgdCloseness,
    Gradcheck,
    Saddle,
    All,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Oracles => "oracles",
            Suite::Descent => "descent",
            Suite::SgdCloseness => "sgd_closeness",
            Suite::Gradcheck => "gradcheck",
            Suite::Saddle => "saddle",
            Suite::All => "all",
        })
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "oracles" => Suite::Oracles,
            "descent" => Suite::Descent,
            "sgd_closeness" | "sgd-closeness" => Suite::SgdCloseness,
            "gradcheck" => Suite::Gradcheck,
            "saddle" => Suite::Saddle,
            "all" => Suite::All,
            other => return Err(format!("unknown suite {other:?}")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    /// The descent suite runs at `α = factor / (3L)`. Anything above 1 leaves
    /// the guaranteed range; used as a negative control.
    pub descent_alpha_factor: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            descent_alpha_factor: 1.0,
        }
    }
}

/// One property: `measured ≤ tolerance` passes.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl PropertyResult {
    fn new(name: &'static str, measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name,
            measured,
            tolerance,
            detail: detail.into(),
        }
    }

    /// NaN never passes.
    pub fn passed(&self) -> bool {
        self.measured <= self.tolerance
    }
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} measured={:e} tolerance={:e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance
        )?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckReport {
    pub properties: Vec<PropertyResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(PropertyResult::passed)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.properties {
            writeln!(f, "{p}")?;
        }
        Ok(())
    }
}

pub fn run_checks(suite: Suite, opts: &CheckOptions) -> CheckReport {
    let mut properties = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Oracles {
        properties.push(gd_oracle());
        properties.push(grad_avg_oracle());
        properties.push(scalar_cases());
        properties.push(fixed_points());
    }
    if all || suite == Suite::Descent {
        properties.push(descent_psd(opts.descent_alpha_factor, 100, 1000));
        properties.push(descent_rosenbrock(opts.descent_alpha_factor));
    }
    if all || suite == Suite::SgdCloseness {
        properties.extend(sgd_closeness());
    }
    if all || suite == Suite::Gradcheck {
        properties.push(gradcheck());
    }
    if all || suite == Suite::Saddle {
        properties.push(saddle_fixed_point());
        properties.push(saddle_escape());
    }
    CheckReport { properties }
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn random_x(rng: &mut SeededRng, n: usize) -> ParamVector {
    ParamVector::new((0..n).map(|_| rng.uniform_range(-2.0, 2.0)).collect()).expect("finite")
}

fn full_batch(kind: OptimizerKind, alpha: f64, dim: usize) -> OptimizerState {
    OptimizerState::new(kind, Hyperparams::lr(alpha).expect("valid step"), dim)
}

/// Worst per-coordinate relative error of full-batch runs against a closed
/// form, over 50 random diagonal quadratics × 100 steps.
fn trajectory_oracle(
    name: &'static str,
    kind: OptimizerKind,
    seed: u64,
    oracle: fn(
        &SymmetricMatrix,
        &ParamVector,
        f64,
        usize,
    ) -> Result<ParamVector, gradavg_core::NumError>,
) -> PropertyResult {
    let mut rng = SeededRng::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let dim = 1 + rng.index(10);
        let quad = QuadraticForm::random_diagonal(&mut rng, dim, 0.05, 10.0);
        let alpha = rng.uniform_range(0.1, 0.9) / quad.lipschitz().expect("diagonal");
        let x0 = random_x(&mut rng, dim);
        let tr = run_epochs(
            x0.clone(),
            &quad,
            full_batch(kind, alpha, dim),
            100,
            BatchSchedule::FullBatch,
            SeededRng::new(0),
        );
        let Ok(tr) = tr else {
            return PropertyResult::new(name, f64::INFINITY, ORACLE_REL_TOL, "run failed");
        };
        for t in 1..=100 {
            let want = oracle(quad.matrix(), &x0, alpha, t - 1).expect("matching dims");
            for (a, b) in tr.snapshots[t].iter().zip(want.iter()) {
                worst = worst.max(rel_err(*a, *b));
            }
        }
    }
    PropertyResult::new(name, worst, ORACLE_REL_TOL, "50 diagonal Q, 100 steps")
}

pub fn gd_oracle() -> PropertyResult {
    trajectory_oracle("sgd_closed_form", OptimizerKind::Sgd, 11, gd_closed_form)
}

pub fn grad_avg_oracle() -> PropertyResult {
    trajectory_oracle(
        "gradavg_closed_form",
        OptimizerKind::GradAvg,
        12,
        grad_avg_closed_form,
    )
}

/// `J(x) = ½x²` from `x = 1`: one step gives `0.905` at `α = 0.1` and `13/18`
/// at `α = 1/3`.
pub fn scalar_cases() -> PropertyResult {
    let quad = QuadraticForm::new(SymmetricMatrix::identity(1));
    let x = ParamVector::from_slice(&[1.0]).expect("finite");
    let mut worst: f64 = 0.0;
    for (alpha, want) in [(0.1, 0.905), (1.0 / 3.0, 13.0 / 18.0)] {
        let got = grad_avg_step(
            &x,
            &quad,
            Batch::Full,
            Hyperparams::lr(alpha).expect("valid"),
        );
        worst = worst.max(got.map_or(f64::INFINITY, |g| rel_err(g[0], want)));
    }
    PropertyResult::new(
        "gradavg_scalar_cases",
        worst,
        ORACLE_REL_TOL,
        "0.905 and 13/18",
    )
}

/// Every optimizer, started at an exact stationary point of a quadratic, the
/// saddle and Rosenbrock, stays put bit for bit. Measured: number of moves.
pub fn fixed_points() -> PropertyResult {
    let quad = QuadraticForm::random_psd(&mut SeededRng::new(13), 6);
    let cases: [(&dyn Objective, ParamVector); 3] = [
        (&quad, ParamVector::zeros(6)),
        (&SaddleSurface, ParamVector::zeros(2)),
        (
            &Rosenbrock::default(),
            ParamVector::from_slice(&Rosenbrock::default().minimizer()).expect("finite"),
        ),
    ];
    let mut moves = 0usize;
    for (obj, x) in &cases {
        for kind in OptimizerKind::ALL {
            let state =
                OptimizerState::new(kind, Hyperparams::new(0.1, 0.9).expect("valid"), x.len());
            match run_epochs(
                x.clone(),
                *obj,
                state,
                10,
                BatchSchedule::FullBatch,
                SeededRng::new(0),
            ) {
                Ok(tr) => moves += tr.snapshots.iter().filter(|p| *p != x).count(),
                Err(_) => moves += 1,
            }
        }
    }
    PropertyResult::new(
        "fixed_points",
        moves as f64,
        0.0,
        "4 optimizers x 3 stationary points",
    )
}

/// Worst single-step increase of `J` over 100 random PSD quadratics at
/// `α = factor / (3L)`. A run that overflows counts as `+∞`.
pub fn descent_psd(factor: f64, cases: usize, steps: usize) -> PropertyResult {
    let mut rng = SeededRng::new(14);
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0usize;
    for _ in 0..cases {
        let dim = 1 + rng.index(10);
        let quad = QuadraticForm::random_psd(&mut rng, dim);
        let l = quad.lipschitz().expect("power iteration");
        let x0 = random_x(&mut rng, dim);
        match descent_certificate_with_alpha(&quad, factor / (3.0 * l), &x0, steps) {
            Ok(r) => {
                worst = worst.max(r.worst_increase());
                violations += r.violations.len();
            }
            Err(_) => {
                worst = f64::INFINITY;
                violations += 1;
            }
        }
    }
    PropertyResult::new(
        "descent_psd",
        worst,
        DESCENT_TOLERANCE,
        format!("{cases} PSD Q x {steps} steps, alpha={factor}/(3L), {violations} violations"),
    )
}

/// Rosenbrock from `(−1.2, 1)` with `L` from a 41×41 Hessian grid on
/// `[−2, 2]²`.
pub fn descent_rosenbrock(factor: f64) -> PropertyResult {
    let r = Rosenbrock::default();
    let l = r.lipschitz_on_box(-2.0, 2.0, 41).expect("grid");
    let x0 = ParamVector::from_slice(&[-1.2, 1.0]).expect("finite");
    let (worst, n) = match descent_certificate_with_alpha(&r, factor / (3.0 * l), &x0, 10_000) {
        Ok(rep) => (rep.worst_increase(), rep.violations.len()),
        Err(_) => (f64::INFINITY, 1),
    };
    PropertyResult::new(
        "descent_rosenbrock",
        worst,
        DESCENT_TOLERANCE,
        format!("L={l:.4}, 10000 steps, {n} violations"),
    )
}

/// `‖GA step − SGD step‖` against `α` on 20 random PSD quadratics: the gap
/// stays under `(α²/2)L²‖x‖` and its log-log slope is 2.
pub fn sgd_closeness() -> [PropertyResult; 2] {
    let alphas = [1e-1, 1e-2, 1e-3, 1e-4];
    let mut rng = SeededRng::new(15);
    let mut worst_ratio: f64 = 0.0;
    let mut worst_slope: f64 = 0.0;
    let mut slopes = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..20 {
        let dim = 2 + rng.index(9);
        let quad = QuadraticForm::random_psd(&mut rng, dim);
        let l = quad.lipschitz().expect("power iteration");
        let x = random_x(&mut rng, dim);
        let mut gaps = Vec::with_capacity(alphas.len());
        for &a in &alphas {
            let h = Hyperparams::lr(a).expect("valid");
            let ga = grad_avg_step(&x, &quad, Batch::Full, h).expect("finite");
            let sgd = sgd_step(&x, &quad, Batch::Full, h).expect("finite");
            let gap = norm2(&ga.sub(&sgd).expect("same dim"));
            worst_ratio = worst_ratio.max(gap / (0.5 * a * a * l * l * norm2(&x)));
            gaps.push(gap);
        }
        let xs: Vec<f64> = alphas.iter().map(|a| a.log10()).collect();
        let ys: Vec<f64> = gaps.iter().map(|g| g.log10()).collect();
        let s = slope(&xs, &ys);
        slopes = (slopes.0.min(s), slopes.1.max(s));
        worst_slope = worst_slope.max((s - 2.0).abs());
    }
    [
        PropertyResult::new(
            "sgd_gap_bound",
            worst_ratio,
            1.0 + 1e-9,
            "gap / ((a^2/2) L^2 |x|)",
        ),
        PropertyResult::new(
            "sgd_gap_slope",
            worst_slope,
            SLOPE_TOL,
            format!("|slope - 2|, slopes in [{:.4}, {:.4}]", slopes.0, slopes.1),
        ),
    ]
}

/// Least-squares slope of `y` on `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Backprop against central differences at 100 random coordinates per
/// network, for 1 to 3 layers and both losses.
pub fn gradcheck() -> PropertyResult {
    let shapes: [&[usize]; 6] = [
        &[5, 1],
        &[4, 3],
        &[6, 7, 1],
        &[6, 7, 4],
        &[5, 8, 6, 1],
        &[5, 8, 6, 3],
    ];
    let mut worst: f64 = 0.0;
    for (s, shape) in shapes.iter().enumerate() {
        let loss = if shape[shape.len() - 1] == 1 {
            Loss::Mse
        } else {
            Loss::SoftmaxCrossEntropy
        };
        for act in [Activation::Identity, Activation::Relu] {
            worst = worst.max(gradcheck_net(shape, act, loss, 100 + s as u64));
        }
    }
    PropertyResult::new(
        "gradcheck",
        worst,
        GRADCHECK_REL_TOL,
        "h=1e-6, 100 coordinates per net",
    )
}

fn gradcheck_net(sizes: &[usize], act: Activation, loss: Loss, seed: u64) -> f64 {
    let mut rng = SeededRng::new(seed);
    let arch = Architecture::new(sizes, act, loss).expect("valid shape");
    let params = init(
        &arch,
        InitStrategy {
            kind: InitKind::Normal,
            seed,
        },
    )
    .params;
    let n = 8;
    let x = Array2::from_shape_fn((n, sizes[0]), |_| rng.standard_normal());
    let k = sizes[sizes.len() - 1];
    let y: Vec<f64> = match loss {
        Loss::Mse => (0..n).map(|_| rng.standard_normal()).collect(),
        Loss::SoftmaxCrossEntropy => (0..n).map(|_| rng.index(k) as f64).collect(),
    };
    let (_, grad) = arch.loss_and_grad(&params, x.view(), &y).expect("finite");
    let f = |p: Vec<f64>| {
        let p = ParamVector::new(p).expect("finite");
        arch.loss_value(&p, x.view(), &y).expect("finite")
    };
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let i = rng.index(params.len());
        let (mut plus, mut minus) = (params.as_slice().to_vec(), params.as_slice().to_vec());
        plus[i] += GRADCHECK_STEP;
        minus[i] -= GRADCHECK_STEP;
        let numeric = (f(plus) - f(minus)) / (2.0 * GRADCHECK_STEP);
        let err = (grad[i] - numeric).abs() / grad[i].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max(err);
    }
    worst
}

/// The saddle origin is fixed under Grad-Avg. Measured: largest coordinate
/// after 100 steps.
pub fn saddle_fixed_point() -> PropertyResult {
    let tr = run_epochs(
        ParamVector::zeros(2),
        &SaddleSurface,
        full_batch(OptimizerKind::GradAvg, 0.01, 2),
        100,
        BatchSchedule::FullBatch,
        SeededRng::new(0),
    );
    let moved = tr.map_or(f64::INFINITY, |t| {
        t.snapshots
            .iter()
            .map(ParamVector::max_abs)
            .fold(0.0, f64::max)
    });
    PropertyResult::new("saddle_origin_fixed", moved, 0.0, "100 steps from (0, 0)")
}

/// From `(1e-3, 1e-3)` with `α = 0.01`, `|y|` grows every step by exactly
/// `1 + α + α²/2`. Measured: relative error at step 10000, or `+∞` if `|y|`
/// ever fails to grow.
pub fn saddle_escape() -> PropertyResult {
    let alpha = 0.01;
    let tr = run_epochs(
        ParamVector::from_slice(&[1e-3, 1e-3]).expect("finite"),
        &SaddleSurface,
        full_batch(OptimizerKind::GradAvg, alpha, 2),
        10_000,
        BatchSchedule::FullBatch,
        SeededRng::new(0),
    );
    let Ok(tr) = tr else {
        return PropertyResult::new("saddle_escape", f64::INFINITY, SADDLE_REL_TOL, "run failed");
    };
    let ys: Vec<f64> = tr.snapshots.iter().map(|p| p[1].abs()).collect();
    let growing = ys.windows(2).all(|w| w[1] > w[0]);
    let want = 1e-3 * (1.0 + alpha + 0.5 * alpha * alpha).powi(10_000);
    let err = if growing {
        rel_err(ys[10_000], want)
    } else {
        f64::INFINITY
    };
    PropertyResult::new(
        "saddle_escape",
        err,
        SADDLE_REL_TOL,
        format!("|y| grows monotonically to {:.4e}", ys[10_000]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [
            Suite::Oracles,
            Suite::Descent,
            Suite::SgdCloseness,
            Suite::Gradcheck,
            Suite::Saddle,
            Suite::All,
        ] {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
    }

    #[test]
    fn nan_is_a_failure() {
        assert!(!PropertyResult::new("x", f64::NAN, 1.0, "").passed());
    }

    #[test]
    fn slope_of_a_line() {
        assert!((slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-15);
    }
}
