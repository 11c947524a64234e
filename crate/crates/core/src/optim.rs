//! First-order optimizers and a central-difference gradient checker.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One in-place update of a parameter vector from its gradient.
pub trait Optimizer {
    fn update(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()>;
}

fn check_inputs(state_len: usize, params: &[f64], grads: &[f64]) -> Result<()> {
    if params.len() != grads.len() {
        return Err(Error::LengthMismatch {
            left: params.len(),
            right: grads.len(),
        });
    }
    if state_len != params.len() {
        return Err(Error::LengthMismatch {
            left: state_len,
            right: params.len(),
        });
    }
    match grads.iter().position(|g| !g.is_finite()) {
        Some(i) => Err(Error::NonFiniteGradient(i)),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub const DEFAULT_BETA1: f64 = 0.9;
    pub const DEFAULT_BETA2: f64 = 0.999;
    pub const DEFAULT_EPSILON: f64 = 1e-8;

    pub fn new(n_params: usize, lr: f64) -> Self {
        AdamState {
            lr,
            beta1: Self::DEFAULT_BETA1,
            beta2: Self::DEFAULT_BETA2,
            epsilon: Self::DEFAULT_EPSILON,
            step: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }
}

impl Optimizer for AdamState {
    fn update(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        check_inputs(self.m.len(), params, grads)?;
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - libm::pow(self.beta1, f64::from(t));
        let c2 = 1.0 - libm::pow(self.beta2, f64::from(t));
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= self.lr * m_hat / (libm::sqrt(v_hat) + self.epsilon);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdagradState {
    pub lr: f64,
    pub epsilon: f64,
    g2: Vec<f64>,
}

impl AdagradState {
    pub const DEFAULT_EPSILON: f64 = 1e-8;

    pub fn new(n_params: usize, lr: f64) -> Self {
        AdagradState {
            lr,
            epsilon: Self::DEFAULT_EPSILON,
            g2: vec![0.0; n_params],
        }
    }

    /// Accumulated squared gradients.
    pub fn accumulator(&self) -> &[f64] {
        &self.g2
    }
}

impl Optimizer for AdagradState {
    fn update(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        check_inputs(self.g2.len(), params, grads)?;
        for ((p, &g), acc) in params.iter_mut().zip(grads).zip(&mut self.g2) {
            *acc += g * g;
            *p -= self.lr * g / (libm::sqrt(*acc) + self.epsilon);
        }
        Ok(())
    }
}

/// Largest per-coordinate relative gap between `grad_fn(params)` and central
/// differences of `loss_fn` with step `h`. The denominator is
/// `max(|analytic|, |numeric|, 1e-8)`.
pub fn check_gradient<L, G>(mut loss_fn: L, mut grad_fn: G, params: &[f64], h: f64) -> f64
where
    L: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64]) -> Vec<f64>,
{
    let analytic = grad_fn(params);
    let mut probe = params.to_vec();
    let mut worst = 0.0f64;
    for i in 0..params.len() {
        probe[i] = params[i] + h;
        let up = loss_fn(&probe);
        probe[i] = params[i] - h;
        let down = loss_fn(&probe);
        probe[i] = params[i];
        let numeric = (up - down) / (2.0 * h);
        let a = analytic[i];
        let denom = a.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max((a - numeric).abs() / denom);
    }
    worst
}
