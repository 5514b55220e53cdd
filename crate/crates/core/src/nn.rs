//! Dense feed-forward network with exact reverse-mode gradients.
//!
//! All weights and biases live in one flat [`ParamVector`] so the optimizers
//! treat a network like any other objective. Layer `l` maps `nₗ → nₗ₊₁` and
//! stores its weight matrix (`nₗ₊₁ × nₗ`, row-major) followed by its bias.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::data::Dataset;
use crate::numcore::{Batch, NumError, Objective, ParamVector, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Relu => z.max(0.0),
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    /// Mean over samples of the squared error (no ½ factor). One output unit.
    Mse,
    /// Softmax over the output layer, then mean negative log-likelihood of
    /// the integer class target.
    SoftmaxCrossEntropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    /// `N(0, 1/fan_in)`.
    Normal,
    /// `U[−1/√fan_in, 1/√fan_in]`.
    Uniform,
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitKind::Normal => "normal",
            InitKind::Uniform => "uniform",
        })
    }
}

impl FromStr for InitKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normal" => Ok(InitKind::Normal),
            "uniform" => Ok(InitKind::Uniform),
            other => Err(format!("unknown init {other:?} (expected normal|uniform)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InitStrategy {
    pub kind: InitKind,
    pub seed: u64,
}

/// Layer sizes, hidden activations and the loss.
#[derive(Debug, Clone, PartialEq)]
pub struct Architecture {
    layer_sizes: Vec<usize>,
    hidden: Vec<Activation>,
    loss: Loss,
}

impl Architecture {
    /// Same activation on every hidden layer; the output layer is affine.
    pub fn new(layer_sizes: &[usize], hidden: Activation, loss: Loss) -> Result<Self, NumError> {
        let n_hidden = layer_sizes.len().saturating_sub(2);
        Self::with_activations(layer_sizes, vec![hidden; n_hidden], loss)
    }

    pub fn with_activations(
        layer_sizes: &[usize],
        hidden: Vec<Activation>,
        loss: Loss,
    ) -> Result<Self, NumError> {
        if layer_sizes.len() < 2 {
            return Err(NumError::InvalidArgument("need input and output sizes"));
        }
        if layer_sizes.contains(&0) {
            return Err(NumError::InvalidArgument("layer sizes must be positive"));
        }
        if hidden.len() != layer_sizes.len() - 2 {
            return Err(NumError::InvalidArgument("one activation per hidden layer"));
        }
        let out = *layer_sizes.last().unwrap();
        if loss == Loss::Mse && out != 1 {
            return Err(NumError::InvalidArgument(
                "MSE networks have one output unit",
            ));
        }
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            hidden,
            loss,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    /// `Σ (nᵢ·nᵢ₊₁ + nᵢ₊₁)`.
    pub fn param_count(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    /// Offset of layer `l`'s weights; its bias follows them.
    fn offset(&self, layer: usize) -> usize {
        self.layer_sizes[..=layer]
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    fn layer<'p>(&self, params: &'p [f64], l: usize) -> (ArrayView2<'p, f64>, ArrayView1<'p, f64>) {
        let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
        let off = self.offset(l);
        let w = ArrayView2::from_shape((n_out, n_in), &params[off..off + n_in * n_out])
            .expect("layer shape");
        let b = ArrayView1::from(&params[off + n_in * n_out..off + n_in * n_out + n_out]);
        (w, b)
    }

    fn check_params(&self, params: &ParamVector) -> Result<(), NumError> {
        if params.len() != self.param_count() {
            return Err(NumError::DimensionMismatch {
                expected: self.param_count(),
                found: params.len(),
            });
        }
        Ok(())
    }

    fn check_inputs(&self, x: ArrayView2<'_, f64>, y: Option<&[f64]>) -> Result<(), NumError> {
        if x.ncols() != self.input_dim() {
            return Err(NumError::DimensionMismatch {
                expected: self.input_dim(),
                found: x.ncols(),
            });
        }
        if x.nrows() == 0 {
            return Err(NumError::InvalidArgument("empty batch"));
        }
        if let Some(y) = y {
            if y.len() != x.nrows() {
                return Err(NumError::DimensionMismatch {
                    expected: x.nrows(),
                    found: y.len(),
                });
            }
        }
        Ok(())
    }

    /// Output-layer values (regression outputs or logits), one row per sample.
    pub fn forward_batch(
        &self,
        params: &ParamVector,
        x: ArrayView2<'_, f64>,
    ) -> Result<Array2<f64>, NumError> {
        self.check_params(params)?;
        self.check_inputs(x, None)?;
        Ok(self.forward_trace(params.as_slice(), x).1.pop().unwrap())
    }

    /// Pre-activations `z` and activations `a` of every layer (input excluded).
    fn forward_trace(
        &self,
        p: &[f64],
        x: ArrayView2<'_, f64>,
    ) -> (Vec<Array2<f64>>, Vec<Array2<f64>>) {
        let layers = self.num_layers();
        let mut zs: Vec<Array2<f64>> = Vec::with_capacity(layers);
        let mut acts: Vec<Array2<f64>> = Vec::with_capacity(layers);
        for l in 0..layers {
            let (w, b) = self.layer(p, l);
            let input = if l == 0 { x } else { acts[l - 1].view() };
            let z = input.dot(&w.t()) + b;
            let a = if l + 1 < layers {
                let act = self.hidden[l];
                z.mapv(|v| act.apply(v))
            } else {
                z.clone()
            };
            zs.push(z);
            acts.push(a);
        }
        (zs, acts)
    }

    /// Mean loss of a batch.
    pub fn loss_value(
        &self,
        params: &ParamVector,
        x: ArrayView2<'_, f64>,
        y: &[f64],
    ) -> Result<f64, NumError> {
        self.check_params(params)?;
        self.check_inputs(x, Some(y))?;
        let out = self.forward_trace(params.as_slice(), x).1.pop().unwrap();
        let (loss, _) = self.output_loss(&out, y, false)?;
        Ok(loss)
    }

    /// Mean loss of a batch and its exact gradient.
    pub fn loss_and_grad(
        &self,
        params: &ParamVector,
        x: ArrayView2<'_, f64>,
        y: &[f64],
    ) -> Result<(f64, ParamVector), NumError> {
        self.check_params(params)?;
        self.check_inputs(x, Some(y))?;
        let p = params.as_slice();
        let (zs, acts) = self.forward_trace(p, x);
        let (loss, delta) = self.output_loss(acts.last().unwrap(), y, true)?;
        let mut delta = delta.expect("requested");

        let mut grad = vec![0.0; self.param_count()];
        for l in (0..self.num_layers()).rev() {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let off = self.offset(l);
            let a_prev = if l == 0 { x } else { acts[l - 1].view() };
            let dw = delta.t().dot(&a_prev);
            let db = delta.sum_axis(Axis(0));
            let (gw, rest) = grad[off..].split_at_mut(n_in * n_out);
            gw.iter_mut().zip(dw.iter()).for_each(|(g, v)| *g = *v);
            rest[..n_out]
                .iter_mut()
                .zip(db.iter())
                .for_each(|(g, v)| *g = *v);
            if l > 0 {
                let (w, _) = self.layer(p, l);
                let act = self.hidden[l - 1];
                let z_prev = &zs[l - 1];
                let mut d = delta.dot(&w);
                d.zip_mut_with(z_prev, |g, &z| *g *= act.derivative(z));
                delta = d;
            }
        }
        let grad = ParamVector::new(grad).map_err(|_| NumError::NonFinite {
            context: "network gradient",
        })?;
        Ok((loss, grad))
    }

    /// Mean loss and, if asked, `∂loss/∂output`.
    fn output_loss(
        &self,
        out: &Array2<f64>,
        y: &[f64],
        want_delta: bool,
    ) -> Result<(f64, Option<Array2<f64>>), NumError> {
        let b = out.nrows() as f64;
        let (loss, delta) = match self.loss {
            Loss::Mse => {
                let err: Array1<f64> = out.column(0).iter().zip(y).map(|(o, t)| o - t).collect();
                let loss = err.iter().map(|e| e * e).sum::<f64>() / b;
                let delta = want_delta.then(|| err.mapv(|e| 2.0 * e / b).insert_axis(Axis(1)));
                (loss, delta)
            }
            Loss::SoftmaxCrossEntropy => {
                let k = self.output_dim();
                let classes = class_indices(y, k)?;
                let mut total = 0.0;
                let mut delta = want_delta.then(|| Array2::zeros(out.raw_dim()));
                for (i, row) in out.rows().into_iter().enumerate() {
                    let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
                    let sum_exp: f64 = row.iter().map(|v| (v - max).exp()).sum();
                    let log_z = max + sum_exp.ln();
                    total += log_z - row[classes[i]];
                    if let Some(d) = delta.as_mut() {
                        let mut drow = d.row_mut(i);
                        for (j, v) in row.iter().enumerate() {
                            drow[j] = (v - log_z).exp() / b;
                        }
                        drow[classes[i]] -= 1.0 / b;
                    }
                }
                (total / b, delta)
            }
        };
        if !loss.is_finite() {
            return Err(NumError::NonFinite {
                context: "network loss",
            });
        }
        Ok((loss, delta))
    }
}

fn class_indices(y: &[f64], k: usize) -> Result<Vec<usize>, NumError> {
    y.iter()
        .map(|&t| {
            if t >= 0.0 && t.fract() == 0.0 && (t as usize) < k {
                Ok(t as usize)
            } else {
                Err(NumError::InvalidArgument("class target out of range"))
            }
        })
        .collect()
}

/// Row-wise softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let exp: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

/// An architecture together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    pub arch: Architecture,
    pub params: ParamVector,
}

impl DenseNet {
    pub fn new(arch: Architecture, params: ParamVector) -> Result<Self, NumError> {
        arch.check_params(&params)?;
        Ok(Self { arch, params })
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NumError> {
        let row = ArrayView2::from_shape((1, x.len()), x)
            .map_err(|_| NumError::InvalidArgument("input shape"))?;
        Ok(self
            .arch
            .forward_batch(&self.params, row)?
            .into_raw_vec_and_offset()
            .0)
    }

    pub fn loss_and_grad(
        &self,
        x: ArrayView2<'_, f64>,
        y: &[f64],
    ) -> Result<(f64, ParamVector), NumError> {
        self.arch.loss_and_grad(&self.params, x, y)
    }
}

/// Fresh parameters: weights drawn per `strategy`, biases zero.
pub fn init(arch: &Architecture, strategy: InitStrategy) -> DenseNet {
    let mut rng = SeededRng::new(strategy.seed);
    let mut params = vec![0.0; arch.param_count()];
    for l in 0..arch.num_layers() {
        let (n_in, n_out) = (arch.layer_sizes[l], arch.layer_sizes[l + 1]);
        let off = arch.offset(l);
        let bound = 1.0 / (n_in as f64).sqrt();
        for w in &mut params[off..off + n_in * n_out] {
            *w = match strategy.kind {
                InitKind::Normal => bound * rng.standard_normal(),
                InitKind::Uniform => rng.uniform_range(-bound, bound),
            };
        }
    }
    DenseNet {
        arch: arch.clone(),
        params: ParamVector::new(params).expect("finite draws"),
    }
}

/// A network's mean loss over a data set, as an [`Objective`].
pub struct NetObjective<'a> {
    arch: &'a Architecture,
    data: &'a Dataset,
}

impl<'a> NetObjective<'a> {
    pub fn new(arch: &'a Architecture, data: &'a Dataset) -> Result<Self, NumError> {
        if data.num_features() != arch.input_dim() {
            return Err(NumError::DimensionMismatch {
                expected: arch.input_dim(),
                found: data.num_features(),
            });
        }
        Ok(Self { arch, data })
    }

    fn with_batch<T>(
        &self,
        batch: Batch<'_>,
        f: impl FnOnce(ArrayView2<'_, f64>, &[f64]) -> Result<T, NumError>,
    ) -> Result<T, NumError> {
        match batch {
            Batch::Full => f(self.data.features().view(), self.data.targets()),
            Batch::Indices(idx) => {
                if idx.iter().any(|&i| i >= self.data.len()) {
                    return Err(NumError::InvalidArgument("batch index out of range"));
                }
                let x = self.data.features().select(Axis(0), idx);
                let y: Vec<f64> = idx.iter().map(|&i| self.data.targets()[i]).collect();
                f(x.view(), &y)
            }
        }
    }
}

impl Objective for NetObjective<'_> {
    fn dim(&self) -> usize {
        self.arch.param_count()
    }

    fn value(&self, theta: &ParamVector, batch: Batch<'_>) -> Result<f64, NumError> {
        self.with_batch(batch, |x, y| self.arch.loss_value(theta, x, y))
    }

    fn gradient(&self, theta: &ParamVector, batch: Batch<'_>) -> Result<ParamVector, NumError> {
        self.value_and_gradient(theta, batch).map(|(_, g)| g)
    }

    fn value_and_gradient(
        &self,
        theta: &ParamVector,
        batch: Batch<'_>,
    ) -> Result<(f64, ParamVector), NumError> {
        self.with_batch(batch, |x, y| self.arch.loss_and_grad(theta, x, y))
    }

    fn sample_count(&self) -> Option<usize> {
        Some(self.data.len())
    }
}

/// Mean squared error of a one-output network on `data`.
pub fn mean_squared_error(
    arch: &Architecture,
    params: &ParamVector,
    data: &Dataset,
) -> Result<f64, NumError> {
    let out = arch.forward_batch(params, data.features().view())?;
    let se: f64 = out
        .column(0)
        .iter()
        .zip(data.targets())
        .map(|(o, t)| (o - t) * (o - t))
        .sum();
    let mse = se / data.len() as f64;
    if mse.is_finite() {
        Ok(mse)
    } else {
        Err(NumError::NonFinite {
            context: "test MSE",
        })
    }
}

/// Fraction of rows whose arg-max output equals the class target.
pub fn accuracy(
    arch: &Architecture,
    params: &ParamVector,
    data: &Dataset,
) -> Result<f64, NumError> {
    let out = arch.forward_batch(params, data.features().view())?;
    let hits = out
        .rows()
        .into_iter()
        .zip(data.targets())
        .filter(|(row, &t)| {
            let best = row
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
                    if v > bv {
                        (i, v)
                    } else {
                        (bi, bv)
                    }
                });
            best.0 as f64 == t
        })
        .count();
    Ok(hits as f64 / data.len() as f64)
}

/// Slice of `params` holding layer `l`'s weights then bias.
pub fn layer_params<'p>(arch: &Architecture, params: &'p ParamVector, l: usize) -> &'p [f64] {
    let off = arch.offset(l);
    let len = arch.layer_sizes[l] * arch.layer_sizes[l + 1] + arch.layer_sizes[l + 1];
    &params.as_slice()[off..off + len]
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn pv(v: &[f64]) -> ParamVector {
        ParamVector::from_slice(v).unwrap()
    }

    fn linear() -> Architecture {
        Architecture::new(&[1, 1], Activation::Identity, Loss::Mse).unwrap()
    }

    #[test]
    fn param_count_formula() {
        let a = Architecture::new(&[784, 128, 10], Activation::Relu, Loss::SoftmaxCrossEntropy)
            .unwrap();
        assert_eq!(a.param_count(), 784 * 128 + 128 + 128 * 10 + 10);
        assert!(Architecture::new(&[3], Activation::Relu, Loss::Mse).is_err());
        assert!(Architecture::new(&[3, 2], Activation::Relu, Loss::Mse).is_err());
    }

    #[test]
    fn forward_examples() {
        let net = DenseNet::new(linear(), pv(&[2.0, 1.0])).unwrap();
        assert_eq!(net.forward(&[3.0]).unwrap(), vec![7.0]);

        let a = Architecture::new(&[3, 4, 2], Activation::Relu, Loss::SoftmaxCrossEntropy).unwrap();
        let zero = DenseNet::new(a.clone(), ParamVector::zeros(a.param_count())).unwrap();
        assert_eq!(zero.forward(&[1.0, -2.0, 5.0]).unwrap(), vec![0.0, 0.0]);
        assert!(zero.forward(&[1.0]).is_err());

        // Hidden pre-activation (−1, 2) → relu (0, 2); output sums the hidden units.
        let a = Architecture::new(&[1, 2, 1], Activation::Relu, Loss::Mse).unwrap();
        let net = DenseNet::new(a, pv(&[-1.0, 2.0, 0.0, 0.0, 1.0, 1.0, 0.0])).unwrap();
        assert_eq!(net.forward(&[1.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn mse_examples() {
        let net = DenseNet::new(linear(), pv(&[1.0, 0.0])).unwrap();
        let (l, g) = net.loss_and_grad(array![[1.0]].view(), &[1.0]).unwrap();
        assert_eq!(l, 0.0);
        assert!(g.is_zero());

        let net = DenseNet::new(linear(), pv(&[0.0, 0.0])).unwrap();
        let (l, g) = net.loss_and_grad(array![[1.0]].view(), &[2.0]).unwrap();
        assert_eq!(l, 4.0);
        assert_eq!(g.as_slice(), &[-4.0, -4.0]);
    }

    #[test]
    fn linear_mse_matches_least_squares_gradient() {
        let mut rng = SeededRng::new(5);
        let (n, d) = (17, 4);
        let x = Array2::from_shape_fn((n, d), |_| rng.standard_normal());
        let y: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let arch = Architecture::new(&[d, 1], Activation::Identity, Loss::Mse).unwrap();
        let params = init(
            &arch,
            InitStrategy {
                kind: InitKind::Normal,
                seed: 1,
            },
        )
        .params;
        let (_, g) = arch.loss_and_grad(&params, x.view(), &y).unwrap();
        // ∂/∂w mean (w·x + b − y)² = (2/n) Σ r x, ∂/∂b = (2/n) Σ r.
        let (w, b) = (&params.as_slice()[..d], params[d]);
        let mut expect = vec![0.0; d + 1];
        for i in 0..n {
            let r: f64 = (0..d).map(|j| w[j] * x[[i, j]]).sum::<f64>() + b - y[i];
            for j in 0..d {
                expect[j] += 2.0 * r * x[[i, j]] / n as f64;
            }
            expect[d] += 2.0 * r / n as f64;
        }
        for (a, e) in g.iter().zip(&expect) {
            assert!((a - e).abs() <= 1e-10, "{a} vs {e}");
        }
    }

    #[test]
    fn softmax_and_cross_entropy() {
        let p = softmax(&[1.0, 2.0, 3.0, -1000.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let a =
            Architecture::new(&[2, 3], Activation::Identity, Loss::SoftmaxCrossEntropy).unwrap();
        let params = init(
            &a,
            InitStrategy {
                kind: InitKind::Uniform,
                seed: 4,
            },
        )
        .params;
        let l = a
            .loss_value(&params, array![[0.3, -2.0], [1.0, 1.0]].view(), &[0.0, 2.0])
            .unwrap();
        assert!(l >= 0.0);
        assert!(a
            .loss_value(&params, array![[0.3, -2.0]].view(), &[3.0])
            .is_err());
        assert!(a
            .loss_value(&params, array![[0.3, -2.0]].view(), &[0.5])
            .is_err());
    }

    #[test]
    fn init_is_deterministic_and_in_support() {
        let a =
            Architecture::new(&[100, 50, 10], Activation::Relu, Loss::SoftmaxCrossEntropy).unwrap();
        let s = InitStrategy {
            kind: InitKind::Uniform,
            seed: 8,
        };
        let n1 = init(&a, s);
        assert_eq!(n1, init(&a, s));
        let w0 = &layer_params(&a, &n1.params, 0)[..100 * 50];
        assert!(w0.iter().all(|w| w.abs() <= 0.1));
        let b0 = &layer_params(&a, &n1.params, 0)[100 * 50..];
        assert!(b0.iter().all(|&b| b == 0.0));
        let w1 = &layer_params(&a, &n1.params, 1)[..50 * 10];
        let bound = 1.0 / 50f64.sqrt();
        assert!(w1.iter().all(|w| w.abs() <= bound));
    }

    #[test]
    fn normal_init_std() {
        // fan_in 100, 10⁴ weights: sample std should be 0.1 within 5%.
        let a = Architecture::new(&[100, 100], Activation::Identity, Loss::SoftmaxCrossEntropy)
            .unwrap();
        let net = init(
            &a,
            InitStrategy {
                kind: InitKind::Normal,
                seed: 3,
            },
        );
        let w = &net.params.as_slice()[..10_000];
        let m = w.iter().sum::<f64>() / w.len() as f64;
        let sd = (w.iter().map(|v| (v - m).powi(2)).sum::<f64>() / w.len() as f64).sqrt();
        assert!((sd - 0.1).abs() <= 0.005, "{sd}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn mse_is_order_invariant(seed in any::<u64>(), n in 2usize..20) {
            let mut rng = SeededRng::new(seed);
            let x = Array2::from_shape_fn((n, 3), |_| rng.standard_normal());
            let y: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
            let arch = Architecture::new(&[3, 5, 1], Activation::Relu, Loss::Mse).unwrap();
            let p = init(&arch, InitStrategy { kind: InitKind::Normal, seed }).params;
            let base = arch.loss_value(&p, x.view(), &y).unwrap();
            let perm = rng.permutation(n);
            let xp = x.select(Axis(0), &perm);
            let yp: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
            let shuffled = arch.loss_value(&p, xp.view(), &yp).unwrap();
            prop_assert!((base - shuffled).abs() <= 1e-12 * base.max(1.0));
        }

        #[test]
        fn softmax_rows_sum_to_one(logits in prop::collection::vec(-50f64..50.0, 1..12)) {
            let p = softmax(&logits);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(p.iter().all(|&v| v >= 0.0));
        }
    }
}
