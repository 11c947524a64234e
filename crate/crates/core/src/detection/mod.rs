//! Stateful anomaly rules that compare predictions with actual values.
//!
//! Both rules look for sustained shortfalls, not single low points:
//!
//! * the accumulator counts local anomalies (+1) against normal points (-2,
//!   or -3 right after a peak) and fires at a threshold;
//! * the tail-probability rule compares a short-window mean of the one-sided
//!   raw score with the long-window mean and deviation.
//!
//! The intersection of the two trades recall for fewer false positives.

mod accumulator;
mod combine;
mod rolling;
mod score;
mod tailprob;

pub use accumulator::{
    local_anomaly_threshold, local_anomaly_variance, AccumulatorConfig, AccumulatorState, LocalRule,
};
pub use combine::{flags_to_regions, intersect, Region};
pub use rolling::RollingStats;
pub use score::{raw_score, RawScore};
pub use tailprob::{gaussian_upper_tail, TailProbConfig, TailProbState, TailStep};

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetectionConfig {
    pub accumulator: AccumulatorConfig,
    pub tail: TailProbConfig,
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        self.accumulator.validate()?;
        self.tail.validate()
    }
}

/// Per-point outputs of all three rules.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuleOutputs {
    pub accumulator: Vec<f64>,
    pub accumulator_flags: Vec<bool>,
    pub tail_likelihood: Vec<f64>,
    pub tail_flags: Vec<bool>,
    pub intersection_flags: Vec<bool>,
}

impl RuleOutputs {
    pub fn len(&self) -> usize {
        self.accumulator_flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accumulator_flags.is_empty()
    }
}

/// Streams every point through both rules in order.
///
/// The variance local rule, when selected, uses the population variance of
/// the last `tail.short_window` actual values (current point included).
pub fn run_rules(
    predictions: &[f64],
    actuals: &[f64],
    cfg: &DetectionConfig,
) -> Result<RuleOutputs> {
    if predictions.len() != actuals.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: actuals.len(),
        });
    }
    cfg.validate()?;
    let mut acc = AccumulatorState::new();
    let mut tail = TailProbState::new(&cfg.tail);
    let mut actual_window = RollingStats::new(cfg.tail.short_window);
    let mut out = RuleOutputs::default();
    for (&p, &a) in predictions.iter().zip(actuals) {
        let variance = match cfg.accumulator.local_rule {
            LocalRule::Threshold => None,
            LocalRule::Variance => {
                actual_window.push(a);
                Some(actual_window.variance())
            }
        };
        let fired = acc.step(&cfg.accumulator, p, a, variance)?;
        let t = tail.step(&cfg.tail, raw_score(p, a));
        out.accumulator.push(acc.value());
        out.accumulator_flags.push(fired);
        out.tail_likelihood.push(t.likelihood);
        out.tail_flags.push(t.flagged);
    }
    out.intersection_flags = intersect(&out.accumulator_flags, &out.tail_flags)?;
    Ok(out)
}
