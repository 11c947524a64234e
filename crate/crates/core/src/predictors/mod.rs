//! Regression models behind one predict-per-point contract.
//!
//! Every model maps a point (its epoch-grid index plus its feature row) to an
//! expected value in normalized units. Models that ignore one of the two
//! inputs simply do not read it, which leaves room for sequence models that
//! need both.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::features::DesignMatrix;
use crate::series::Series;

mod baseline;
mod fourier;
mod mlp;

pub use baseline::BaselineModel;
pub use fourier::{fourier_train, FourierConfig, FourierModel, FourierObjective};
pub use mlp::{mlp_train, relu6, relu6_derivative, MlpConfig, MlpModel};

/// What a model sees for one point.
#[derive(Debug, Clone, Copy)]
pub struct ModelInput<'a> {
    /// `timestamp / interval`, shared by training and test months.
    pub grid_index: u64,
    pub features: &'a [f64],
}

pub trait Predictor {
    fn predict(&self, input: &ModelInput<'_>) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ModelKind {
    Baseline,
    Fourier,
    Mlp,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Baseline => "baseline",
            ModelKind::Fourier => "fourier",
            ModelKind::Mlp => "mlp",
        }
    }
}

impl core::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "baseline" | "threshold" => Ok(ModelKind::Baseline),
            "fourier" => Ok(ModelKind::Fourier),
            "mlp" | "dnn" => Ok(ModelKind::Mlp),
            _ => Err(crate::error::invalid(
                "model",
                "expected baseline, fourier or mlp",
            )),
        }
    }
}

impl core::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Any fitted model.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Baseline(BaselineModel),
    Fourier(FourierModel),
    Mlp(MlpModel),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Baseline(_) => ModelKind::Baseline,
            Model::Fourier(_) => ModelKind::Fourier,
            Model::Mlp(_) => ModelKind::Mlp,
        }
    }
}

impl Predictor for Model {
    fn predict(&self, input: &ModelInput<'_>) -> Result<f64> {
        match self {
            Model::Baseline(m) => m.predict(input),
            Model::Fourier(m) => m.predict(input),
            Model::Mlp(m) => m.predict(input),
        }
    }
}

/// A normalized series with its aligned design matrix.
#[derive(Debug, Clone, Copy)]
pub struct TrainingData<'a> {
    series: &'a Series,
    design: &'a DesignMatrix,
}

impl<'a> TrainingData<'a> {
    pub fn new(series: &'a Series, design: &'a DesignMatrix) -> Result<Self> {
        if design.indices().end != series.len() {
            return Err(Error::LengthMismatch {
                left: series.len(),
                right: design.indices().end,
            });
        }
        Ok(TrainingData { series, design })
    }

    pub fn series(&self) -> &'a Series {
        self.series
    }

    pub fn design(&self) -> &'a DesignMatrix {
        self.design
    }

    /// Labels aligned with the design rows.
    pub fn targets(&self) -> &'a [f64] {
        &self.series.values()[self.design.indices()]
    }
}

/// A fitted model plus what training observed.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport<M> {
    pub model: M,
    pub train_mse: f64,
    /// Loss at every optimizer step (batch loss for the MLP).
    pub loss_history: Vec<f64>,
    /// False when the training series is shorter than the model's period.
    pub covers_full_period: bool,
}

/// Mean squared error over paired values.
pub fn mse(predictions: &[f64], actuals: &[f64]) -> Result<f64> {
    if predictions.len() != actuals.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: actuals.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptySeries);
    }
    let sum: f64 = predictions
        .iter()
        .zip(actuals)
        .map(|(p, a)| (p - a) * (p - a))
        .sum();
    Ok(sum / predictions.len() as f64)
}

/// Predictions of `model` for every row of `design` over `series`.
pub fn predict_series<P: Predictor + ?Sized>(
    model: &P,
    series: &Series,
    design: &DesignMatrix,
) -> Result<Vec<f64>> {
    let mut buf = Vec::with_capacity(design.width());
    design
        .rows()
        .iter()
        .zip(design.indices())
        .map(|(row, i)| {
            buf.clear();
            row.extend_into(&mut buf);
            model.predict(&ModelInput {
                grid_index: series.grid_index(i),
                features: &buf,
            })
        })
        .collect()
}
