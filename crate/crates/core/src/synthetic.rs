//! Synthetic validation streams and simulated outages.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::calendar::SECONDS_PER_DAY;
use crate::error::{invalid, Error, Result};
use crate::evaluation::LabeledRegions;
use crate::seed::rng;
use crate::series::{Series, DEFAULT_INTERVAL};

/// Quantization levels of the stepwise sine.
pub const STEP_LEVELS: [f64; 4] = [0.125, 0.375, 0.625, 0.875];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// `0.5 + 0.5 * sin(2*pi*t/P)`.
    Sine,
    /// The sine quantized to four equal-width levels.
    StepwiseSine,
}

impl core::str::FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sine" => Ok(SyntheticKind::Sine),
            "stepwise_sine" | "stepwise-sine" | "stepwise" => Ok(SyntheticKind::StepwiseSine),
            _ => Err(invalid("kind", "expected sine or stepwise_sine")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub period_points: usize,
    pub length: usize,
    pub noise_stddev: f64,
    pub seed: u64,
    pub start_timestamp: i64,
    pub interval: u32,
}

impl SyntheticSpec {
    pub fn new(kind: SyntheticKind, length: usize) -> Self {
        SyntheticSpec {
            kind,
            period_points: 288,
            length,
            noise_stddev: 0.0,
            seed: 0,
            start_timestamp: 0,
            interval: DEFAULT_INTERVAL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(invalid("length", "must be at least 1"));
        }
        if self.period_points < 2 {
            return Err(invalid("period", "must be at least 2"));
        }
        check_stddev(self.noise_stddev)
    }
}

fn check_stddev(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            "noise",
            "standard deviation must be finite and non-negative",
        ))
    }
}

fn noise(rng: &mut impl Rng, stddev: f64) -> f64 {
    if stddev == 0.0 {
        0.0
    } else {
        let z: f64 = rng.sample(StandardNormal);
        z * stddev
    }
}

/// Noiseless value of `kind` at index `t`.
pub fn clean_value(kind: SyntheticKind, period: usize, t: usize) -> f64 {
    let phase = TAU * (t % period) as f64 / period as f64;
    let sine = 0.5 + 0.5 * libm::sin(phase);
    match kind {
        SyntheticKind::Sine => sine,
        SyntheticKind::StepwiseSine => {
            let bin = ((sine * 4.0) as usize).min(3);
            STEP_LEVELS[bin]
        }
    }
}

/// Generates a stream; Gaussian noise is seeded and values are not clamped.
pub fn gen(spec: &SyntheticSpec) -> Result<Series> {
    spec.validate()?;
    let mut rng = rng(spec.seed);
    let values = (0..spec.length)
        .map(|t| clean_value(spec.kind, spec.period_points, t) + noise(&mut rng, spec.noise_stddev))
        .collect();
    Series::new(spec.start_timestamp, spec.interval, values)
}

/// Replaces a span with noise around a fixed level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnomalySpec {
    pub start: usize,
    pub length: usize,
    pub level: f64,
    pub noise_stddev: f64,
    pub seed: u64,
}

impl AnomalySpec {
    /// Span given as inclusive `(start, end)`.
    pub fn span(start: usize, end: usize, level: f64) -> Result<Self> {
        if end < start {
            return Err(Error::InvalidLabels { start, end });
        }
        Ok(AnomalySpec {
            start,
            length: end - start + 1,
            level,
            noise_stddev: 0.0,
            seed: 0,
        })
    }

    pub fn end(&self) -> usize {
        self.start + self.length.saturating_sub(1)
    }
}

pub fn inject(series: &Series, spec: &AnomalySpec) -> Result<(Series, LabeledRegions)> {
    check_stddev(spec.noise_stddev)?;
    let len = series.len();
    if spec.length == 0 || spec.start + spec.length > len {
        return Err(Error::SpanOutOfBounds {
            start: spec.start,
            end: spec.end(),
            len,
        });
    }
    let mut rng = rng(spec.seed);
    let mut values = series.values().to_vec();
    for v in &mut values[spec.start..spec.start + spec.length] {
        *v = spec.level + noise(&mut rng, spec.noise_stddev);
    }
    Ok((
        series.with_values(values)?,
        LabeledRegions::new(vec![(spec.start, spec.end())])?,
    ))
}

/// Flattens one day's traffic above `quiet_level`, leaving quiet samples alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissingPeakSpec {
    /// Whole days counted from the first sample.
    pub day_index: usize,
    pub quiet_level: f64,
    pub noise_stddev: f64,
    pub seed: u64,
}

impl MissingPeakSpec {
    pub fn new(day_index: usize, quiet_level: f64) -> Self {
        MissingPeakSpec {
            day_index,
            quiet_level,
            noise_stddev: 0.0,
            seed: 0,
        }
    }
}

pub fn missing_peak(series: &Series, spec: &MissingPeakSpec) -> Result<(Series, LabeledRegions)> {
    check_stddev(spec.noise_stddev)?;
    let interval = i64::from(series.interval());
    if SECONDS_PER_DAY % interval != 0 {
        return Err(invalid("interval", "must divide one day"));
    }
    let per_day = (SECONDS_PER_DAY / interval) as usize;
    let days = series.len() / per_day;
    if spec.day_index >= days {
        return Err(Error::DayOutOfRange {
            day: spec.day_index,
            days,
        });
    }
    let day = spec.day_index * per_day..(spec.day_index + 1) * per_day;
    let mut rng = rng(spec.seed);
    let mut values = series.values().to_vec();
    let mut modified: Vec<usize> = Vec::new();
    for i in day {
        if values[i] > spec.quiet_level {
            values[i] = spec.quiet_level + noise(&mut rng, spec.noise_stddev);
            modified.push(i);
        }
    }
    let labels = match (modified.first(), modified.last()) {
        (Some(&first), Some(&last)) => LabeledRegions::new(vec![(first, last)])?,
        _ => LabeledRegions::empty(),
    };
    Ok((series.with_values(values)?, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sine(length: usize) -> Series {
        gen(&SyntheticSpec::new(SyntheticKind::Sine, length)).unwrap()
    }

    #[test]
    fn sine_landmarks() {
        let s = sine(288);
        assert_eq!(s.values()[72], 1.0);
        assert_eq!(s.values()[0], 0.5);
    }

    #[test]
    fn stepwise_codomain() {
        let s = gen(&SyntheticSpec::new(SyntheticKind::StepwiseSine, 1000)).unwrap();
        assert!(s.values().iter().all(|v| STEP_LEVELS.contains(v)));
        for level in STEP_LEVELS {
            assert!(s.values().contains(&level));
        }
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let spec = SyntheticSpec {
            noise_stddev: 0.05,
            seed: 3,
            ..SyntheticSpec::new(SyntheticKind::Sine, 500)
        };
        let a = gen(&spec).unwrap();
        assert_eq!(a, gen(&spec).unwrap());
        let b = gen(&SyntheticSpec { seed: 4, ..spec }).unwrap();
        assert_ne!(a, b);
        assert!(gen(&SyntheticSpec {
            noise_stddev: -1.0,
            ..spec
        })
        .is_err());
        assert!(gen(&SyntheticSpec { length: 0, ..spec }).is_err());
        assert!(gen(&SyntheticSpec {
            period_points: 1,
            ..spec
        })
        .is_err());
    }

    #[test]
    fn inject_zeros() {
        let s = sine(300);
        let spec = AnomalySpec::span(100, 150, 0.0).unwrap();
        let (out, labels) = inject(&s, &spec).unwrap();
        assert!(out.values()[100..=150].iter().all(|&v| v == 0.0));
        assert_eq!(labels.spans(), &[(100, 150)]);
        assert_eq!(&out.values()[..100], &s.values()[..100]);
        assert_eq!(&out.values()[151..], &s.values()[151..]);
    }

    #[test]
    fn inject_at_baseline_still_labels() {
        let s = Series::new(0, 300, vec![0.1; 300]).unwrap();
        let (out, labels) = inject(&s, &AnomalySpec::span(10, 20, 0.1).unwrap()).unwrap();
        assert_eq!(out.values(), s.values());
        assert_eq!(labels.spans(), &[(10, 20)]);
    }

    #[test]
    fn inject_out_of_bounds() {
        let s = sine(100);
        assert!(matches!(
            inject(&s, &AnomalySpec::span(90, 120, 0.0).unwrap()),
            Err(Error::SpanOutOfBounds { .. })
        ));
    }

    #[test]
    fn missing_peak_flattens_upper_half() {
        let s = sine(288 * 2);
        let (out, labels) = missing_peak(&s, &MissingPeakSpec::new(1, 0.5)).unwrap();
        let day = &out.values()[288..576];
        let orig = &s.values()[288..576];
        // Second half-period never exceeds 0.5 and is left untouched.
        assert_eq!(&day[145..], &orig[145..]);
        assert!(day[1..144].iter().all(|&v| v == 0.5));
        assert_eq!(&out.values()[..288], &s.values()[..288]);
        let (start, end) = labels.spans()[0];
        assert_eq!(start, 289);
        assert!(end == 431 || end == 432, "{end}");
    }

    #[test]
    fn missing_peak_levels() {
        let s = sine(288);
        let (out, labels) = missing_peak(&s, &MissingPeakSpec::new(0, 1.0)).unwrap();
        assert_eq!(out, s);
        assert!(labels.is_empty());
        let (out, labels) = missing_peak(&s, &MissingPeakSpec::new(0, 0.0)).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
        assert_eq!(labels.spans().len(), 1);
        assert!(matches!(
            missing_peak(&s, &MissingPeakSpec::new(1, 0.0)),
            Err(Error::DayOutOfRange { .. })
        ));
    }

    proptest! {
        #[test]
        fn noiseless_streams_are_periodic(period in 2usize..400, stepwise: bool) {
            let kind = if stepwise { SyntheticKind::StepwiseSine } else { SyntheticKind::Sine };
            let s = gen(&SyntheticSpec { period_points: period, ..SyntheticSpec::new(kind, period * 3) }).unwrap();
            let v = s.values();
            for t in 0..2 * period {
                prop_assert_eq!(v[t], v[t + period]);
            }
        }

        #[test]
        fn inject_touches_only_the_span(start in 0usize..200, len in 1usize..100, seed: u64) {
            let s = sine(300);
            prop_assume!(start + len <= 300);
            let spec = AnomalySpec { start, length: len, level: 0.2, noise_stddev: 0.05, seed };
            let (out, _) = inject(&s, &spec).unwrap();
            for i in 0..300 {
                if i < start || i >= start + len {
                    prop_assert_eq!(out.values()[i], s.values()[i]);
                }
            }
        }
    }
}
