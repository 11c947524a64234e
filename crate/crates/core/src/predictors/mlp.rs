//! Fully connected ReLU6 regressor trained with Adam.
//!
//! Parameters live in one flat vector. Layer `l` maps `widths[l]` inputs to
//! `widths[l + 1]` outputs and stores its weights row-major as
//! `[input][output]`, followed by its biases. The last layer is linear with a
//! single output.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{ModelInput, Predictor, TrainReport, TrainingData};
use crate::error::{invalid, Error, Result};
use crate::optim::{AdamState, Optimizer};
use crate::seed::rng;

pub fn relu6(x: f64) -> f64 {
    x.clamp(0.0, 6.0)
}

/// Derivative of [`relu6`], taken as 0 at the kinks.
pub fn relu6_derivative(x: f64) -> f64 {
    if x > 0.0 && x < 6.0 {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MlpConfig {
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub steps: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden_layers: 10,
            hidden_width: 200,
            learning_rate: 1e-4,
            batch_size: 200,
            steps: 1200,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn widths(&self, input_width: usize) -> Vec<usize> {
        let mut w = vec![input_width];
        w.extend(core::iter::repeat(self.hidden_width).take(self.hidden_layers));
        w.push(1);
        w
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_width == 0 && self.hidden_layers > 0 {
            return Err(invalid("mlp.hidden_width", "must be positive"));
        }
        if self.batch_size == 0 {
            return Err(invalid("mlp.batch", "must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid("mlp.lr", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    widths: Vec<usize>,
    params: Vec<f64>,
}

fn param_count(widths: &[usize]) -> usize {
    widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl MlpModel {
    pub fn new(widths: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::InvalidShape(
                "need an input width and an output width",
            ));
        }
        if widths.contains(&0) {
            return Err(Error::InvalidShape("layer widths must be positive"));
        }
        if *widths.last().unwrap() != 1 {
            return Err(Error::InvalidShape("output layer must have width 1"));
        }
        let expected = param_count(&widths);
        if params.len() != expected {
            return Err(Error::LengthMismatch {
                left: expected,
                right: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidShape("parameters must be finite"));
        }
        Ok(MlpModel { widths, params })
    }

    pub fn zeros(widths: Vec<usize>) -> Result<Self> {
        let n = param_count(&widths);
        Self::new(widths, vec![0.0; n])
    }

    /// He-scaled Gaussian weights (`std = sqrt(2 / fan_in)`), zero biases.
    pub fn initialized(widths: Vec<usize>, seed: u64) -> Result<Self> {
        let mut model = Self::zeros(widths)?;
        let mut rng = rng(seed);
        for l in 0..model.layer_count() {
            let (fan_in, _) = model.layer_shape(l);
            let std = libm::sqrt(2.0 / fan_in as f64);
            let (w, _) = model.layer_offsets(l);
            for p in &mut model.params[w.clone()] {
                let z: f64 = rng.sample(StandardNormal);
                *p = z * std;
            }
        }
        Ok(model)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn layer_count(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::LengthMismatch {
                left: self.params.len(),
                right: params.len(),
            });
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    fn layer_shape(&self, l: usize) -> (usize, usize) {
        (self.widths[l], self.widths[l + 1])
    }

    /// Ranges of layer `l`'s weights and biases within [`Self::params`].
    pub fn layer_offsets(&self, l: usize) -> (core::ops::Range<usize>, core::ops::Range<usize>) {
        let start = param_count(&self.widths[..=l]);
        let (i, o) = self.layer_shape(l);
        (start..start + i * o, start + i * o..start + i * o + o)
    }

    pub fn forward(&self, row: &[f64]) -> Result<f64> {
        Ok(self.forward_batch(row, 1)?[0])
    }

    /// Outputs for `batch` row-major input rows.
    pub fn forward_batch(&self, inputs: &[f64], batch: usize) -> Result<Vec<f64>> {
        self.check_inputs(inputs, batch)?;
        Ok(self.forward_pass(&self.params, inputs, batch).output)
    }

    fn check_inputs(&self, inputs: &[f64], batch: usize) -> Result<()> {
        if batch == 0 || inputs.len() % batch != 0 || inputs.len() / batch != self.input_width() {
            return Err(Error::WidthMismatch {
                expected: self.input_width(),
                got: inputs.len().checked_div(batch).unwrap_or(0),
            });
        }
        Ok(())
    }

    fn forward_pass(&self, params: &[f64], inputs: &[f64], batch: usize) -> Activations {
        let mut pre = Vec::with_capacity(self.layer_count());
        let mut post: Vec<Vec<f64>> = Vec::with_capacity(self.layer_count());
        for l in 0..self.layer_count() {
            let (n_in, n_out) = self.layer_shape(l);
            let (w, b) = self.layer_offsets(l);
            let x = if l == 0 { inputs } else { &post[l - 1][..] };
            let mut z = vec![0.0; batch * n_out];
            for row in z.chunks_exact_mut(n_out) {
                row.copy_from_slice(&params[b.clone()]);
            }
            gemm(
                batch,
                n_in,
                n_out,
                x,
                (n_in, 1),
                &params[w],
                (n_out, 1),
                1.0,
                &mut z,
            );
            if l + 1 < self.layer_count() {
                post.push(z.iter().map(|&v| relu6(v)).collect());
            }
            pre.push(z);
        }
        let output = pre.last().cloned().unwrap_or_default();
        Activations { pre, post, output }
    }

    /// Batch MSE and its gradient with respect to [`Self::params`].
    pub fn loss_and_gradient(&self, inputs: &[f64], targets: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.loss_and_gradient_at(&self.params, inputs, targets)
    }

    /// As [`Self::loss_and_gradient`], evaluated at `params` instead of the
    /// model's own parameters.
    pub fn loss_and_gradient_at(
        &self,
        params: &[f64],
        inputs: &[f64],
        targets: &[f64],
    ) -> Result<(f64, Vec<f64>)> {
        let batch = targets.len();
        self.check_inputs(inputs, batch)?;
        if params.len() != self.params.len() {
            return Err(Error::LengthMismatch {
                left: self.params.len(),
                right: params.len(),
            });
        }
        let acts = self.forward_pass(params, inputs, batch);
        let scale = 2.0 / batch as f64;
        let mut loss = 0.0;
        let mut delta: Vec<f64> = acts
            .output
            .iter()
            .zip(targets)
            .map(|(y_hat, y)| {
                let r = y_hat - y;
                loss += r * r;
                scale * r
            })
            .collect();
        loss /= batch as f64;

        let mut grad = vec![0.0; params.len()];
        for l in (0..self.layer_count()).rev() {
            let (n_in, n_out) = self.layer_shape(l);
            let (w, b) = self.layer_offsets(l);
            let x = if l == 0 {
                inputs
            } else {
                &acts.post[l - 1][..]
            };
            // dW = x^T * delta
            gemm(
                n_in,
                batch,
                n_out,
                x,
                (1, n_in),
                &delta,
                (n_out, 1),
                0.0,
                &mut grad[w.clone()],
            );
            let gb = &mut grad[b];
            for row in delta.chunks_exact(n_out) {
                for (g, d) in gb.iter_mut().zip(row) {
                    *g += d;
                }
            }
            if l > 0 {
                // dx = delta * W^T, then through the previous activation.
                let mut dx = vec![0.0; batch * n_in];
                gemm(
                    batch,
                    n_out,
                    n_in,
                    &delta,
                    (n_out, 1),
                    &params[w],
                    (1, n_out),
                    0.0,
                    &mut dx,
                );
                for (d, &z) in dx.iter_mut().zip(&acts.pre[l - 1]) {
                    *d *= relu6_derivative(z);
                }
                delta = dx;
            }
        }
        Ok((loss, grad))
    }
}

struct Activations {
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
    output: Vec<f64>,
}

/// `c = beta * c + a * b` for an `m x k` by `k x n` product; `c` is
/// row-major and contiguous. Strides are `(row, column)` in elements.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
) {
    if m == 0 || n == 0 {
        return;
    }
    assert_eq!(c.len(), m * n);
    if k == 0 {
        c.iter_mut().for_each(|x| *x *= beta);
        return;
    }
    assert!((m - 1) * rsa + (k - 1) * csa < a.len(), "lhs out of bounds");
    assert!((k - 1) * rsb + (n - 1) * csb < b.len(), "rhs out of bounds");
    // SAFETY: the asserts above bound every element the kernel reads from `a`
    // and `b`; `c` is exactly m x n with row stride n, and the three slices
    // cannot alias because `c` is borrowed mutably.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

impl Predictor for MlpModel {
    fn predict(&self, input: &ModelInput<'_>) -> Result<f64> {
        self.forward(input.features)
    }
}

/// Fits an MLP to `data` with minibatch Adam. Batches are drawn uniformly with
/// replacement from a generator seeded by `cfg.seed`.
pub fn mlp_train(data: &TrainingData<'_>, cfg: &MlpConfig) -> Result<TrainReport<MlpModel>> {
    cfg.validate()?;
    let design = data.design();
    let width = design.width();
    let flat = design.to_flat();
    let targets = data.targets();
    let n = targets.len();
    if n == 0 {
        return Err(Error::EmptySeries);
    }

    let mut model = MlpModel::initialized(cfg.widths(width), cfg.seed)?;
    let mut params = model.params.clone();
    let mut opt = AdamState::new(params.len(), cfg.learning_rate);
    let mut sampler = rng(cfg.seed ^ 0x5bd1_e995);
    let mut batch_x = vec![0.0; cfg.batch_size * width];
    let mut batch_y = vec![0.0; cfg.batch_size];
    let mut loss_history = Vec::with_capacity(cfg.steps);

    for step in 0..cfg.steps {
        for (k, y) in batch_y.iter_mut().enumerate() {
            let i = sampler.gen_range(0..n);
            batch_x[k * width..(k + 1) * width].copy_from_slice(&flat[i * width..(i + 1) * width]);
            *y = targets[i];
        }
        let (loss, grad) = model.loss_and_gradient_at(&params, &batch_x, &batch_y)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss(step));
        }
        loss_history.push(loss);
        opt.update(&mut params, &grad)?;
    }
    model.set_params(&params)?;

    let predictions = model.forward_batch(&flat, n)?;
    let train_mse = super::mse(&predictions, targets)?;
    if !train_mse.is_finite() {
        return Err(Error::NonFiniteLoss(cfg.steps));
    }
    Ok(TrainReport {
        model,
        train_mse,
        loss_history,
        covers_full_period: true,
    })
}
