//! Flat `key = value` run configuration.
//!
//! `#` starts a comment, blank lines are ignored and later keys override
//! earlier ones. Every key has a default, so an empty file is a valid
//! configuration. [`RunConfig::to_text`] prints all keys with their current
//! values.

use std::path::Path;
use std::str::FromStr;

use dropwatch_core::calendar::YearMonth;
use dropwatch_core::detection::{DetectionConfig, LocalRule};
use dropwatch_core::features::FeatureConfig;
use dropwatch_core::predictors::{BaselineModel, FourierConfig, MlpConfig, ModelKind};
use dropwatch_core::seed::derive_seed;
use dropwatch_core::series::IntervalPolicy;

use crate::error::{parse_error, read_text, Error, Result};

/// Keys accepted by [`RunConfig::set`], with a one-line description each.
pub const KEYS: &[(&str, &str)] = &[
    ("model", "baseline | fourier | mlp"),
    ("seed", "root seed; per-component seeds are derived from it"),
    ("data.header", "skip the first line of the series file"),
    (
        "data.interval",
        "sampling interval in seconds, or `auto` to infer it",
    ),
    (
        "split.train_month",
        "YYYY-MM, or `auto` for the first month in the data",
    ),
    (
        "split.test_month",
        "YYYY-MM, or `auto` for the month after the training month",
    ),
    (
        "features.derivative",
        "append v[t-1] - v[t-2] to the network input",
    ),
    (
        "baseline.threshold",
        "constant prediction of the baseline model",
    ),
    (
        "fourier.period",
        "period in samples (2016 = one week at 5 minutes)",
    ),
    (
        "fourier.harmonics",
        "number of harmonics above the constant term",
    ),
    ("fourier.learning_rate", "Adagrad learning rate"),
    ("fourier.steps", "full-batch Adagrad steps"),
    ("mlp.hidden_layers", "number of ReLU6 hidden layers"),
    ("mlp.hidden_width", "units per hidden layer"),
    ("mlp.learning_rate", "Adam learning rate"),
    ("mlp.batch_size", "minibatch size"),
    ("mlp.steps", "Adam steps"),
    ("acc.local_rule", "threshold | variance"),
    (
        "acc.local_delta",
        "drop below prediction that counts as a local anomaly",
    ),
    (
        "acc.not_anomalous_above",
        "actual values at or above this are never local anomalies",
    ),
    (
        "acc.peak_value",
        "prediction level whose falling edge starts post-peak mode",
    ),
    (
        "acc.fire_threshold",
        "accumulator value at which the rule fires",
    ),
    (
        "acc.variance_multiplier",
        "variance rule: drop must exceed this times the rolling variance",
    ),
    ("tail.long_window", "long window W1 in samples"),
    ("tail.short_window", "short window W2 in samples"),
    (
        "tail.likelihood_threshold",
        "flag when the likelihood reaches this value",
    ),
    (
        "tail.variance_floor",
        "lower bound on the long-window standard deviation",
    ),
];

/// Every tunable of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelKind,
    pub seed: u64,
    pub header: bool,
    pub interval: IntervalPolicy,
    pub train_month: Option<YearMonth>,
    pub test_month: Option<YearMonth>,
    pub features: FeatureConfig,
    pub baseline: BaselineModel,
    pub fourier: FourierConfig,
    pub mlp: MlpConfig,
    pub detection: DetectionConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelKind::Fourier,
            seed: 0,
            header: false,
            interval: IntervalPolicy::default(),
            train_month: None,
            test_month: None,
            features: FeatureConfig::default(),
            baseline: BaselineModel::default(),
            fourier: FourierConfig::default(),
            mlp: MlpConfig::default(),
            detection: DetectionConfig::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| Error::Config {
        key: key.into(),
        message: format!("`{value}`: {e}"),
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config {
            key: key.into(),
            message: format!("`{value}` is not a boolean"),
        }),
    }
}

fn parse_month(key: &str, value: &str) -> Result<Option<YearMonth>> {
    if value == "auto" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn month_text(m: Option<YearMonth>) -> String {
    m.map_or_else(|| "auto".to_string(), |m| m.to_string())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_error("config", i + 1, "expected `key = value`"))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| parse_error("config", i + 1, e.to_string()))?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| Error::Config {
            key: assignment.into(),
            message: "override must look like key=value".into(),
        })?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let acc = &mut self.detection.accumulator;
        let tail = &mut self.detection.tail;
        match key {
            "model" => self.model = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "data.header" => self.header = parse_bool(key, value)?,
            "data.interval" => {
                self.interval = if value == "auto" {
                    IntervalPolicy::Infer
                } else {
                    IntervalPolicy::Fixed(parse(key, value)?)
                }
            }
            "split.train_month" => self.train_month = parse_month(key, value)?,
            "split.test_month" => self.test_month = parse_month(key, value)?,
            "features.derivative" => self.features.use_derivative = parse_bool(key, value)?,
            "baseline.threshold" => self.baseline.threshold = parse(key, value)?,
            "fourier.period" => self.fourier.period_points = parse(key, value)?,
            "fourier.harmonics" => self.fourier.harmonics = parse(key, value)?,
            "fourier.learning_rate" => self.fourier.learning_rate = parse(key, value)?,
            "fourier.steps" => self.fourier.steps = parse(key, value)?,
            "mlp.hidden_layers" => self.mlp.hidden_layers = parse(key, value)?,
            "mlp.hidden_width" => self.mlp.hidden_width = parse(key, value)?,
            "mlp.learning_rate" => self.mlp.learning_rate = parse(key, value)?,
            "mlp.batch_size" => self.mlp.batch_size = parse(key, value)?,
            "mlp.steps" => self.mlp.steps = parse(key, value)?,
            "acc.local_rule" => {
                acc.local_rule = match value {
                    "threshold" => LocalRule::Threshold,
                    "variance" => LocalRule::Variance,
                    _ => {
                        return Err(Error::Config {
                            key: key.into(),
                            message: format!("`{value}`: expected threshold or variance"),
                        })
                    }
                }
            }
            "acc.local_delta" => acc.local_delta = parse(key, value)?,
            "acc.not_anomalous_above" => acc.not_anomalous_above = parse(key, value)?,
            "acc.peak_value" => acc.peak_value = parse(key, value)?,
            "acc.fire_threshold" => acc.fire_threshold = parse(key, value)?,
            "acc.variance_multiplier" => acc.variance_multiplier = parse(key, value)?,
            "tail.long_window" => tail.long_window = parse(key, value)?,
            "tail.short_window" => tail.short_window = parse(key, value)?,
            "tail.likelihood_threshold" => tail.likelihood_threshold = parse(key, value)?,
            "tail.variance_floor" => tail.variance_floor = parse(key, value)?,
            _ => {
                return Err(Error::Config {
                    key: key.into(),
                    message: "unknown key".into(),
                })
            }
        }
        Ok(())
    }

    /// Current value of `key` in the same syntax [`RunConfig::set`] accepts.
    pub fn get(&self, key: &str) -> Option<String> {
        let acc = &self.detection.accumulator;
        let tail = &self.detection.tail;
        Some(match key {
            "model" => self.model.to_string(),
            "seed" => self.seed.to_string(),
            "data.header" => self.header.to_string(),
            "data.interval" => match self.interval {
                IntervalPolicy::Fixed(s) => s.to_string(),
                IntervalPolicy::Infer => "auto".into(),
            },
            "split.train_month" => month_text(self.train_month),
            "split.test_month" => month_text(self.test_month),
            "features.derivative" => self.features.use_derivative.to_string(),
            "baseline.threshold" => self.baseline.threshold.to_string(),
            "fourier.period" => self.fourier.period_points.to_string(),
            "fourier.harmonics" => self.fourier.harmonics.to_string(),
            "fourier.learning_rate" => self.fourier.learning_rate.to_string(),
            "fourier.steps" => self.fourier.steps.to_string(),
            "mlp.hidden_layers" => self.mlp.hidden_layers.to_string(),
            "mlp.hidden_width" => self.mlp.hidden_width.to_string(),
            "mlp.learning_rate" => self.mlp.learning_rate.to_string(),
            "mlp.batch_size" => self.mlp.batch_size.to_string(),
            "mlp.steps" => self.mlp.steps.to_string(),
            "acc.local_rule" => match acc.local_rule {
                LocalRule::Threshold => "threshold".into(),
                LocalRule::Variance => "variance".into(),
            },
            "acc.local_delta" => acc.local_delta.to_string(),
            "acc.not_anomalous_above" => acc.not_anomalous_above.to_string(),
            "acc.peak_value" => acc.peak_value.to_string(),
            "acc.fire_threshold" => acc.fire_threshold.to_string(),
            "acc.variance_multiplier" => acc.variance_multiplier.to_string(),
            "tail.long_window" => tail.long_window.to_string(),
            "tail.short_window" => tail.short_window.to_string(),
            "tail.likelihood_threshold" => tail.likelihood_threshold.to_string(),
            "tail.variance_floor" => tail.variance_floor.to_string(),
            _ => return None,
        })
    }

    /// All keys, one per line, each preceded by its description.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, doc) in KEYS {
            let value = self.get(key).expect("every listed key has a value");
            out.push_str(&format!("# {doc}\n{key} = {value}\n"));
        }
        out
    }

    /// Checks every model and rule parameter.
    pub fn validate(&self) -> Result<()> {
        self.fourier.validate()?;
        self.mlp.validate()?;
        self.detection.validate()?;
        if !self.baseline.threshold.is_finite() {
            return Err(Error::Config {
                key: "baseline.threshold".into(),
                message: "must be finite".into(),
            });
        }
        if let (Some(train), Some(test)) = (self.train_month, self.test_month) {
            if train == test {
                return Err(Error::Config {
                    key: "split.test_month".into(),
                    message: format!("test month {test} equals the training month"),
                });
            }
        }
        Ok(())
    }

    pub fn fourier_config(&self) -> FourierConfig {
        FourierConfig {
            seed: derive_seed(self.seed, "fourier"),
            ..self.fourier
        }
    }

    pub fn mlp_config(&self) -> MlpConfig {
        MlpConfig {
            seed: derive_seed(self.seed, "mlp"),
            ..self.mlp
        }
    }
}
