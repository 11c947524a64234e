//! The accumulator rule.
//!
//! ```text
//!   local anomaly        acc += 1
//!   normal point         acc -= 2          (clamped to [0, 1.5 * fire])
//!   normal, post-peak    acc -= 3          (clamped to [-fire, 1.5 * fire])
//!   flagged              acc >= fire
//! ```
//!
//! Post-peak mode starts when the prediction falls through `peak_value` and
//! ends once the accumulator climbs from below zero back to zero or above, at
//! which point the usual zero floor applies again. The negative floor keeps
//! the phase lag between model and traffic right after a peak from firing.

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum LocalRule {
    /// Drop larger than `local_delta` while the actual value is low.
    #[default]
    Threshold,
    /// Drop larger than `variance_multiplier` times the rolling variance.
    Variance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AccumulatorConfig {
    pub local_delta: f64,
    /// Actual values at or above this are never local anomalies.
    pub not_anomalous_above: f64,
    pub peak_value: f64,
    pub fire_threshold: f64,
    pub variance_multiplier: f64,
    pub local_rule: LocalRule,
}

impl Default for AccumulatorConfig {
    fn default() -> Self {
        AccumulatorConfig {
            local_delta: 0.1,
            not_anomalous_above: 0.3,
            peak_value: 0.35,
            fire_threshold: 15.0,
            variance_multiplier: 20.0,
            local_rule: LocalRule::Threshold,
        }
    }
}

impl AccumulatorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            (self.local_delta, "acc.local_delta"),
            (self.not_anomalous_above, "acc.not_anomalous_above"),
            (self.peak_value, "acc.peak_value"),
            (self.fire_threshold, "acc.fire_threshold"),
            (self.variance_multiplier, "acc.variance_multiplier"),
        ];
        for (v, name) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, "must be positive"));
            }
        }
        if self.peak_value < self.not_anomalous_above {
            return Err(invalid(
                "acc.peak_value",
                "must be at least acc.not_anomalous_above",
            ));
        }
        Ok(())
    }
}

/// `prediction - actual > local_delta` and `actual < not_anomalous_above`.
pub fn local_anomaly_threshold(prediction: f64, actual: f64, cfg: &AccumulatorConfig) -> bool {
    prediction - actual > cfg.local_delta && actual < cfg.not_anomalous_above
}

/// One-sided: `prediction - actual > variance_multiplier * rolling_variance`.
pub fn local_anomaly_variance(
    prediction: f64,
    actual: f64,
    rolling_variance: f64,
    cfg: &AccumulatorConfig,
) -> bool {
    prediction - actual > cfg.variance_multiplier * rolling_variance
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AccumulatorState {
    acc: f64,
    in_post_peak: bool,
    prev_prediction: Option<f64>,
}

impl AccumulatorState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn value(&self) -> f64 {
        self.acc
    }

    pub fn in_post_peak(&self) -> bool {
        self.in_post_peak
    }

    /// Advances one point and returns whether the rule fires.
    ///
    /// `rolling_variance` must be given exactly when the variance rule is
    /// configured.
    pub fn step(
        &mut self,
        cfg: &AccumulatorConfig,
        prediction: f64,
        actual: f64,
        rolling_variance: Option<f64>,
    ) -> Result<bool> {
        let local = match (cfg.local_rule, rolling_variance) {
            (LocalRule::Threshold, None) => local_anomaly_threshold(prediction, actual, cfg),
            (LocalRule::Variance, Some(var)) => {
                local_anomaly_variance(prediction, actual, var, cfg)
            }
            (LocalRule::Threshold, Some(_)) => {
                return Err(invalid(
                    "rolling_variance",
                    "only used by the variance rule",
                ))
            }
            (LocalRule::Variance, None) => {
                return Err(invalid("rolling_variance", "required by the variance rule"))
            }
        };

        if let Some(prev) = self.prev_prediction {
            if prev >= cfg.peak_value && prediction < cfg.peak_value {
                self.in_post_peak = true;
            }
        }
        self.prev_prediction = Some(prediction);

        let was_negative = self.acc < 0.0;
        self.acc += match (local, self.in_post_peak) {
            (true, _) => 1.0,
            (false, false) => -2.0,
            (false, true) => -3.0,
        };
        let floor = if self.in_post_peak {
            -cfg.fire_threshold
        } else {
            0.0
        };
        self.acc = self.acc.clamp(floor, 1.5 * cfg.fire_threshold);
        if self.in_post_peak && was_negative && self.acc >= 0.0 {
            self.in_post_peak = false;
        }
        Ok(self.acc >= cfg.fire_threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn cfg3() -> AccumulatorConfig {
        AccumulatorConfig {
            fire_threshold: 3.0,
            ..AccumulatorConfig::default()
        }
    }

    fn run(cfg: &AccumulatorConfig, points: &[(f64, f64)]) -> Vec<(f64, bool)> {
        let mut s = AccumulatorState::new();
        points
            .iter()
            .map(|&(p, a)| {
                let f = s.step(cfg, p, a, None).unwrap();
                (s.value(), f)
            })
            .collect()
    }

    // Below peak_value, so no peak edges: (0.3, 0.0) is a local anomaly and
    // (0.3, 0.3) is not.
    const ANOM: (f64, f64) = (0.3, 0.0);
    const NORMAL: (f64, f64) = (0.3, 0.3);

    #[test]
    fn fires_on_third_consecutive_anomaly() {
        let trace = run(&cfg3(), &[ANOM, ANOM, ANOM]);
        assert_eq!(trace, [(1.0, false), (2.0, false), (3.0, true)]);
    }

    #[test]
    fn normal_points_clamp_at_zero() {
        let trace = run(&cfg3(), &[ANOM, NORMAL, ANOM]);
        assert_eq!(trace, [(1.0, false), (0.0, false), (1.0, false)]);
    }

    #[test]
    fn post_peak_goes_negative() {
        let cfg = cfg3();
        let trace = run(&cfg, &[(0.4, 0.4), (0.2, 0.2)]);
        assert_eq!(trace, [(0.0, false), (-3.0, false)]);
        let mut s = AccumulatorState::new();
        s.step(&cfg, 0.4, 0.4, None).unwrap();
        s.step(&cfg, 0.2, 0.2, None).unwrap();
        assert!(s.in_post_peak());
        // Floors at -fire, then climbs out on anomalies and leaves the mode.
        s.step(&cfg, 0.2, 0.2, None).unwrap();
        assert_eq!(s.value(), -3.0);
        for expected in [-2.0, -1.0, 0.0] {
            s.step(&cfg, 0.3, 0.0, None).unwrap();
            assert_eq!(s.value(), expected);
        }
        assert!(!s.in_post_peak());
        s.step(&cfg, 0.3, 0.3, None).unwrap();
        assert_eq!(s.value(), 0.0);
    }

    #[test]
    fn threshold_local_rule() {
        let c = AccumulatorConfig::default();
        assert!(local_anomaly_threshold(0.5, 0.2, &c));
        assert!(!local_anomaly_threshold(0.5, 0.45, &c));
        assert!(!local_anomaly_threshold(0.9, 0.35, &c));
    }

    #[test]
    fn variance_local_rule() {
        let c = AccumulatorConfig::default();
        assert!(local_anomaly_variance(0.5, 0.1, 0.01, &c));
        assert!(!local_anomaly_variance(0.5, 0.1, 0.05, &c));
        assert!(!local_anomaly_variance(0.1, 0.5, 0.0, &c));
    }

    #[test]
    fn variance_argument_must_match_rule() {
        let mut s = AccumulatorState::new();
        assert!(s
            .step(&AccumulatorConfig::default(), 0.5, 0.1, Some(0.1))
            .is_err());
        let c = AccumulatorConfig {
            local_rule: LocalRule::Variance,
            ..Default::default()
        };
        assert!(s.step(&c, 0.5, 0.1, None).is_err());
        assert!(!s.step(&c, 0.5, 0.1, Some(0.001)).unwrap());
        assert_eq!(s.value(), 1.0);
    }

    #[test]
    fn config_validation() {
        assert!(AccumulatorConfig::default().validate().is_ok());
        let bad = AccumulatorConfig {
            peak_value: 0.2,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = AccumulatorConfig {
            fire_threshold: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn stays_within_bounds(
            fire in 1.0f64..30.0,
            points in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..2000),
        ) {
            let cfg = AccumulatorConfig { fire_threshold: fire, ..Default::default() };
            let mut s = AccumulatorState::new();
            for (p, a) in points {
                let flagged = s.step(&cfg, p, a, None).unwrap();
                prop_assert!(s.value() >= -fire && s.value() <= 1.5 * fire);
                prop_assert_eq!(flagged, s.value() >= fire);
            }
        }
    }
}
