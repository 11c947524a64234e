/// One-sided shortfall of the actual value below the prediction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RawScore(f64);

impl RawScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `max(prediction - actual, 0)`: only missing activity scores.
pub fn raw_score(prediction: f64, actual: f64) -> RawScore {
    RawScore((prediction - actual).max(0.0))
}
