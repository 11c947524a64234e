//! Gaussian tail-probability rule over raw scores.
//!
//! `L = 1 - Q((mean_short - mean_long) / max(std_long, floor))`, where `Q` is
//! the standard normal upper tail. Nothing is flagged until the long window
//! has filled.

use core::f64::consts::SQRT_2;

use super::rolling::RollingStats;
use super::score::RawScore;
use crate::error::{invalid, Result};

/// `Q(z) = P(Z > z)` for a standard normal `Z`.
pub fn gaussian_upper_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z / SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailProbConfig {
    pub long_window: usize,
    pub short_window: usize,
    pub likelihood_threshold: f64,
    pub variance_floor: f64,
}

impl Default for TailProbConfig {
    fn default() -> Self {
        TailProbConfig {
            // One week of 5-minute samples.
            long_window: 2016,
            short_window: 10,
            likelihood_threshold: 1.0 - 1e-4,
            variance_floor: 1e-8,
        }
    }
}

impl TailProbConfig {
    pub fn validate(&self) -> Result<()> {
        if self.short_window == 0 {
            return Err(invalid("tail.short_window", "must be positive"));
        }
        if self.short_window >= self.long_window {
            return Err(invalid(
                "tail.short_window",
                "must be shorter than tail.long_window",
            ));
        }
        if !(self.likelihood_threshold > 0.0 && self.likelihood_threshold < 1.0) {
            return Err(invalid("tail.likelihood_threshold", "must be in (0, 1)"));
        }
        if !(self.variance_floor > 0.0 && self.variance_floor.is_finite()) {
            return Err(invalid("tail.variance_floor", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailStep {
    pub likelihood: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailProbState {
    long: RollingStats,
    short: RollingStats,
    seen: u64,
}

impl TailProbState {
    pub fn new(cfg: &TailProbConfig) -> Self {
        TailProbState {
            long: RollingStats::new(cfg.long_window),
            short: RollingStats::new(cfg.short_window),
            seen: 0,
        }
    }

    pub fn long(&self) -> &RollingStats {
        &self.long
    }

    pub fn short(&self) -> &RollingStats {
        &self.short
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    /// Pushes one raw score. The first `long_window` points are blind:
    /// likelihood 0, never flagged.
    pub fn step(&mut self, cfg: &TailProbConfig, score: RawScore) -> TailStep {
        let s = score.value();
        self.long.push(s);
        self.short.push(s);
        self.seen += 1;
        if self.seen <= cfg.long_window as u64 {
            return TailStep {
                likelihood: 0.0,
                flagged: false,
            };
        }
        let likelihood = likelihood(
            self.short.mean() - self.long.mean(),
            self.long.std_dev(),
            cfg.variance_floor,
        );
        TailStep {
            likelihood,
            flagged: likelihood >= cfg.likelihood_threshold,
        }
    }
}

/// `1 - Q(diff / max(std, floor))`, evaluated as `Q(-z)`.
pub fn likelihood(diff: f64, std: f64, floor: f64) -> f64 {
    gaussian_upper_tail(-diff / std.max(floor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::raw_score;
    use alloc::vec::Vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    /// Upper tail by composite Simpson quadrature of the normal density on
    /// `[z, z + 12]`; independent of `erfc`.
    fn q_by_quadrature(z: f64) -> f64 {
        let n = 20_000;
        let h = 12.0 / n as f64;
        let pdf = |x: f64| libm::exp(-0.5 * x * x) / libm::sqrt(core::f64::consts::TAU);
        let mut acc = pdf(z) + pdf(z + 12.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * pdf(z + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn equal_means_give_one_half() {
        assert_eq!(likelihood(0.0, 0.3, 1e-8), 0.5);
        assert_eq!(likelihood(0.0, 0.0, 1e-8), 0.5);
    }

    #[test]
    fn three_sigma_matches_quadrature() {
        let oracle = 1.0 - q_by_quadrature(3.0);
        assert!((oracle - 0.998_650_101_968_37).abs() < 1e-10);
        assert!((likelihood(0.6, 0.2, 1e-8) - oracle).abs() < 1e-10);
        for z in [-2.0, -0.5, 0.7, 1.5, 3.719] {
            assert!(
                (gaussian_upper_tail(z) - q_by_quadrature(z)).abs() < 1e-10,
                "z = {z}"
            );
        }
    }

    #[test]
    fn blind_for_the_first_long_window() {
        let cfg = TailProbConfig::default();
        let mut s = TailProbState::new(&cfg);
        for i in 0..cfg.long_window {
            // Huge, changing scores would fire immediately if the rule were live.
            let step = s.step(&cfg, raw_score(if i % 2 == 0 { 0.0 } else { 10.0 }, 0.0));
            assert_eq!(
                step,
                TailStep {
                    likelihood: 0.0,
                    flagged: false
                }
            );
        }
        assert!(s.step(&cfg, raw_score(0.0, 0.0)).likelihood > 0.0);
    }

    #[test]
    fn rolling_stats_match_brute_force_after_fuzz() {
        let cfg = TailProbConfig {
            long_window: 2016,
            ..Default::default()
        };
        let mut state = TailProbState::new(&cfg);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut history = Vec::new();
        for i in 0..10_000 {
            let scale = if (i / 700) % 2 == 0 { 1.0 } else { 1e-3 };
            let s: f64 = rng.gen::<f64>() * scale;
            history.push(s);
            state.step(&cfg, raw_score(s, 0.0));
            if i % 997 == 0 || i == 9_999 {
                let long = &history[history.len().saturating_sub(cfg.long_window)..];
                let short = &history[history.len().saturating_sub(cfg.short_window)..];
                let mean = long.iter().sum::<f64>() / long.len() as f64;
                let var = long.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / long.len() as f64;
                let short_mean = short.iter().sum::<f64>() / short.len() as f64;
                assert!((state.long().mean() - mean).abs() < 1e-9);
                assert!((state.long().variance() - var).abs() < 1e-9);
                assert!((state.short().mean() - short_mean).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(TailProbConfig::default().validate().is_ok());
        let bad = TailProbConfig {
            short_window: 2016,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = TailProbConfig {
            likelihood_threshold: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_mean_gap(a in -5.0f64..5.0, b in -5.0f64..5.0, std in 1e-3f64..2.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(likelihood(lo, std, 1e-8) <= likelihood(hi, std, 1e-8));
        }
    }
}
