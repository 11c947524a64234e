//! Phase-parametric Fourier series fitted with Adagrad.
//!
//! `f(t) = sum_{n=0..H} a_n * sin(2*pi*n*t/P + phi_n)`. The `n = 0` term is a
//! learnable bias `a_0 * sin(phi_0)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;

use super::{ModelInput, Predictor, TrainReport};
use crate::error::{invalid, Error, Result};
use crate::optim::{AdagradState, Optimizer};
use crate::seed::rng;
use crate::series::Series;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FourierConfig {
    pub period_points: u64,
    pub harmonics: usize,
    pub learning_rate: f64,
    pub steps: usize,
    pub seed: u64,
}

impl FourierConfig {
    /// One week of 5-minute samples.
    pub const WEEKLY_PERIOD: u64 = 2016;
    /// One day of 5-minute samples.
    pub const DAILY_PERIOD: u64 = 288;

    /// Daily period with `harmonics` terms and default optimizer settings.
    pub fn daily(harmonics: usize) -> Self {
        FourierConfig {
            period_points: Self::DAILY_PERIOD,
            harmonics,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.period_points == 0 {
            return Err(invalid("fourier.period", "must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid("fourier.lr", "must be positive"));
        }
        Ok(())
    }
}

impl Default for FourierConfig {
    fn default() -> Self {
        FourierConfig {
            period_points: Self::WEEKLY_PERIOD,
            // 64 per day over a week.
            harmonics: 448,
            learning_rate: 0.5,
            steps: 3000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierModel {
    period_points: u64,
    amplitudes: Vec<f64>,
    phases: Vec<f64>,
}

impl FourierModel {
    pub fn new(period_points: u64, amplitudes: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if period_points == 0 {
            return Err(invalid("period_points", "must be positive"));
        }
        if amplitudes.is_empty() {
            return Err(Error::InvalidShape(
                "fourier model needs at least the n = 0 term",
            ));
        }
        if amplitudes.len() != phases.len() {
            return Err(Error::LengthMismatch {
                left: amplitudes.len(),
                right: phases.len(),
            });
        }
        if amplitudes.iter().chain(&phases).any(|x| !x.is_finite()) {
            return Err(Error::InvalidShape("fourier coefficients must be finite"));
        }
        Ok(FourierModel {
            period_points,
            amplitudes,
            phases,
        })
    }

    /// Model with `harmonics + 1` zero coefficients.
    pub fn zeros(period_points: u64, harmonics: usize) -> Result<Self> {
        Self::new(
            period_points,
            vec![0.0; harmonics + 1],
            vec![0.0; harmonics + 1],
        )
    }

    fn from_params(period_points: u64, params: &[f64]) -> Result<Self> {
        let (a, p) = params.split_at(params.len() / 2);
        Self::new(period_points, a.to_vec(), p.to_vec())
    }

    pub fn period_points(&self) -> u64 {
        self.period_points
    }

    /// Highest harmonic index, so there are `harmonics() + 1` terms.
    pub fn harmonics(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Amplitudes followed by phases.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.amplitudes.clone();
        p.extend_from_slice(&self.phases);
        p
    }

    /// Prediction at sample index `t`. Exactly periodic in `t`.
    pub fn predict_at(&self, t: u64) -> f64 {
        let r = t % self.period_points;
        self.amplitudes
            .iter()
            .zip(&self.phases)
            .enumerate()
            .map(|(n, (a, phi))| a * libm::sin(base_angle(n, r, self.period_points) + phi))
            .sum()
    }
}

impl Predictor for FourierModel {
    fn predict(&self, input: &ModelInput<'_>) -> Result<f64> {
        Ok(self.predict_at(input.grid_index))
    }
}

/// `2*pi*n*r/P` with the product reduced modulo `P` first.
fn base_angle(n: usize, residue: u64, period: u64) -> f64 {
    let k = ((n as u128 * u128::from(residue)) % u128::from(period)) as f64;
    TAU * k / period as f64
}

/// MSE of a Fourier model over a fixed sample set, with its exact gradient.
///
/// Predictions depend on `t` only through `t mod P`, so samples are grouped by
/// residue: `sum_t (f_r - y_t)^2 = c_r (f_r - mean_r)^2 + within_r`. Each step
/// then costs `(H + 1) * distinct residues` rather than `(H + 1) * N`.
#[derive(Debug, Clone)]
pub struct FourierObjective {
    period_points: u64,
    terms: usize,
    weights: Vec<f64>,
    means: Vec<f64>,
    within: f64,
    n_samples: f64,
    sin_base: Vec<f64>,
    cos_base: Vec<f64>,
}

impl FourierObjective {
    pub fn new(
        period_points: u64,
        harmonics: usize,
        samples: impl IntoIterator<Item = (u64, f64)>,
    ) -> Result<Self> {
        if period_points == 0 {
            return Err(invalid("period_points", "must be positive"));
        }
        let mut by_residue: alloc::collections::BTreeMap<u64, Vec<f64>> = Default::default();
        let mut n_samples = 0usize;
        for (t, y) in samples {
            by_residue.entry(t % period_points).or_default().push(y);
            n_samples += 1;
        }
        if n_samples == 0 {
            return Err(Error::EmptySeries);
        }
        let terms = harmonics + 1;
        let r_count = by_residue.len();
        let mut weights = Vec::with_capacity(r_count);
        let mut means = Vec::with_capacity(r_count);
        let mut within = 0.0;
        let mut sin_base = vec![0.0; terms * r_count];
        let mut cos_base = vec![0.0; terms * r_count];
        for (j, (&r, ys)) in by_residue.iter().enumerate() {
            let mean = ys.iter().sum::<f64>() / ys.len() as f64;
            within += ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>();
            weights.push(ys.len() as f64);
            means.push(mean);
            for n in 0..terms {
                let angle = base_angle(n, r, period_points);
                sin_base[n * r_count + j] = libm::sin(angle);
                cos_base[n * r_count + j] = libm::cos(angle);
            }
        }
        Ok(FourierObjective {
            period_points,
            terms,
            weights,
            means,
            within,
            n_samples: n_samples as f64,
            sin_base,
            cos_base,
        })
    }

    pub fn n_params(&self) -> usize {
        2 * self.terms
    }

    /// `sin`/`cos` of the phase of term `n`, and its slices of the base tables.
    fn term(&self, params: &[f64], n: usize) -> (f64, f64, &[f64], &[f64]) {
        let r_count = self.means.len();
        let phase = params[self.terms + n];
        (
            libm::sin(phase),
            libm::cos(phase),
            &self.sin_base[n * r_count..(n + 1) * r_count],
            &self.cos_base[n * r_count..(n + 1) * r_count],
        )
    }

    /// Prediction at every residue.
    fn residue_predictions(&self, params: &[f64]) -> Vec<f64> {
        let mut pred = vec![0.0; self.means.len()];
        for n in 0..self.terms {
            let a = params[n];
            let (sp, cp, sb, cb) = self.term(params, n);
            for ((p, s), c) in pred.iter_mut().zip(sb).zip(cb) {
                *p += a * (s * cp + c * sp);
            }
        }
        pred
    }

    fn loss_from(&self, pred: &[f64]) -> f64 {
        let between: f64 = pred
            .iter()
            .zip(&self.means)
            .zip(&self.weights)
            .map(|((f, m), c)| c * (f - m) * (f - m))
            .sum();
        (between + self.within) / self.n_samples
    }

    pub fn loss(&self, params: &[f64]) -> f64 {
        self.loss_from(&self.residue_predictions(params))
    }

    /// MSE and its gradient, laid out as `[d/da_0.., d/dphi_0..]`.
    pub fn loss_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let pred = self.residue_predictions(params);
        let loss = self.loss_from(&pred);
        let scale = 2.0 / self.n_samples;
        let dpred: Vec<f64> = pred
            .iter()
            .zip(&self.means)
            .zip(&self.weights)
            .map(|((f, m), c)| scale * c * (f - m))
            .collect();
        let mut grad = vec![0.0; 2 * self.terms];
        for n in 0..self.terms {
            let (sp, cp, sb, cb) = self.term(params, n);
            let mut ga = 0.0;
            let mut gp = 0.0;
            for ((d, s), c) in dpred.iter().zip(sb).zip(cb) {
                ga += d * (s * cp + c * sp);
                gp += d * (c * cp - s * sp);
            }
            grad[n] = ga;
            grad[self.terms + n] = gp * params[n];
        }
        (loss, grad)
    }

    pub fn period_points(&self) -> u64 {
        self.period_points
    }
}

/// Fits a Fourier model to a normalized series by full-batch Adagrad on MSE.
pub fn fourier_train(series: &Series, cfg: &FourierConfig) -> Result<TrainReport<FourierModel>> {
    cfg.validate()?;
    let samples = series
        .values()
        .iter()
        .enumerate()
        .map(|(i, &y)| (series.grid_index(i), y));
    let objective = FourierObjective::new(cfg.period_points, cfg.harmonics, samples)?;

    let mut rng = rng(cfg.seed);
    let mut params: Vec<f64> = (0..objective.n_params())
        .map(|_| rng.gen_range(-0.1..0.1))
        .collect();
    let mut opt = AdagradState::new(params.len(), cfg.learning_rate);
    let mut loss_history = Vec::with_capacity(cfg.steps);
    for step in 0..cfg.steps {
        let (loss, grad) = objective.loss_and_gradient(&params);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss(step));
        }
        loss_history.push(loss);
        opt.update(&mut params, &grad)?;
    }
    let train_mse = objective.loss(&params);
    if !train_mse.is_finite() {
        return Err(Error::NonFiniteLoss(cfg.steps));
    }
    Ok(TrainReport {
        model: FourierModel::from_params(cfg.period_points, &params)?,
        train_mse,
        loss_history,
        covers_full_period: series.len() as u64 >= cfg.period_points,
    })
}
