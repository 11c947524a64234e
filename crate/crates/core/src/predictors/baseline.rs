use super::{ModelInput, Predictor};
use crate::error::Result;

/// Constant prediction: the level traffic should not fall below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineModel {
    pub threshold: f64,
}

impl BaselineModel {
    pub const DEFAULT_THRESHOLD: f64 = 0.065;

    pub fn new(threshold: f64) -> Self {
        BaselineModel { threshold }
    }

    pub fn predict_at(&self, _index: u64) -> f64 {
        self.threshold
    }
}

impl Default for BaselineModel {
    fn default() -> Self {
        BaselineModel {
            threshold: Self::DEFAULT_THRESHOLD,
        }
    }
}

impl Predictor for BaselineModel {
    fn predict(&self, input: &ModelInput<'_>) -> Result<f64> {
        Ok(self.predict_at(input.grid_index))
    }
}
