//! Uniformly sampled series, min-max normalization and calendar splits.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::Range;

use crate::calendar::YearMonth;
use crate::error::{Error, Result};

/// Sampling interval of the traffic streams: one point every five minutes.
pub const DEFAULT_INTERVAL: u32 = 300;

/// One `timestamp,value` record before it is placed on a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawPoint {
    pub timestamp: i64,
    pub value: f64,
}

impl RawPoint {
    pub fn new(timestamp: i64, value: f64) -> Self {
        RawPoint { timestamp, value }
    }
}

/// How [`Series::from_points`] picks the sampling interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalPolicy {
    /// Every gap must be a multiple of this interval.
    Fixed(u32),
    /// Use the most common difference between consecutive timestamps.
    Infer,
}

impl Default for IntervalPolicy {
    fn default() -> Self {
        IntervalPolicy::Fixed(DEFAULT_INTERVAL)
    }
}

/// Values on a uniform time grid `start + i * interval`.
///
/// Indices that were missing from the source and filled by linear
/// interpolation are recorded in [`Series::filled`]; they are excluded from
/// scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    start: i64,
    interval: u32,
    values: Vec<f64>,
    filled: Vec<usize>,
}

impl Series {
    pub fn new(start: i64, interval: u32, values: Vec<f64>) -> Result<Self> {
        Self::with_filled(start, interval, values, Vec::new())
    }

    fn with_filled(
        start: i64,
        interval: u32,
        values: Vec<f64>,
        filled: Vec<usize>,
    ) -> Result<Self> {
        if start < 0 {
            return Err(Error::NegativeTimestamp(start));
        }
        if interval == 0 {
            return Err(Error::ZeroInterval);
        }
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(i));
        }
        Ok(Series {
            start,
            interval,
            values,
            filled,
        })
    }

    /// Places sorted records on a uniform grid, interpolating missing samples.
    pub fn from_points(points: &[RawPoint], policy: IntervalPolicy) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptySeries)?;
        for (i, p) in points.iter().enumerate() {
            if p.timestamp < 0 {
                return Err(Error::NegativeTimestamp(p.timestamp));
            }
            if !p.value.is_finite() {
                return Err(Error::NonFiniteValue(i));
            }
        }
        let mut gaps = Vec::with_capacity(points.len().saturating_sub(1));
        for w in points.windows(2) {
            let gap = w[1].timestamp - w[0].timestamp;
            if gap == 0 {
                return Err(Error::DuplicateTimestamp(w[0].timestamp));
            }
            if gap < 0 {
                return Err(Error::NonMonotonic {
                    previous: w[0].timestamp,
                    next: w[1].timestamp,
                });
            }
            gaps.push(gap);
        }

        let interval = match policy {
            IntervalPolicy::Fixed(0) => return Err(Error::ZeroInterval),
            IntervalPolicy::Fixed(i) => i64::from(i),
            IntervalPolicy::Infer => mode(&gaps).unwrap_or(i64::from(DEFAULT_INTERVAL)),
        };
        let interval_u32 = u32::try_from(interval).map_err(|_| Error::ZeroInterval)?;

        let mut values = Vec::with_capacity(points.len());
        let mut filled = Vec::new();
        values.push(first.value);
        for (w, &gap) in points.windows(2).zip(&gaps) {
            if gap % interval != 0 {
                return Err(Error::InconsistentInterval {
                    after: w[0].timestamp,
                    gap,
                    interval: interval_u32,
                });
            }
            let steps = gap / interval;
            for j in 1..steps {
                let frac = j as f64 / steps as f64;
                filled.push(values.len());
                values.push(w[0].value + (w[1].value - w[0].value) * frac);
            }
            values.push(w[1].value);
        }
        Self::with_filled(first.timestamp, interval_u32, values, filled)
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn interval(&self) -> u32 {
        self.interval
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; a series holds at least one point.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sorted indices that were filled by interpolation.
    pub fn filled(&self) -> &[usize] {
        &self.filled
    }

    pub fn is_filled(&self, index: usize) -> bool {
        self.filled.binary_search(&index).is_ok()
    }

    pub fn timestamp(&self, index: usize) -> i64 {
        self.start + index as i64 * i64::from(self.interval)
    }

    pub fn timestamps(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.len()).map(move |i| self.timestamp(i))
    }

    /// Position of `index` on the epoch-anchored grid (`timestamp / interval`).
    ///
    /// Periodic models are indexed by this, so a model trained on one month
    /// keeps its phase when predicting the next.
    pub fn grid_index(&self, index: usize) -> u64 {
        self.timestamp(index).div_euclid(i64::from(self.interval)) as u64
    }

    /// Same grid, new values.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Series> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Self::with_filled(self.start, self.interval, values, self.filled.clone())
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Series> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: values.len(),
            });
        }
        Self::with_filled(self.start, self.interval, values, self.filled.clone())
    }

    /// Sub-series over `range`, with filled indices rebased.
    pub fn slice(&self, range: Range<usize>) -> Result<Series> {
        if range.start >= range.end || range.end > self.len() {
            return Err(Error::SpanOutOfBounds {
                start: range.start,
                end: range.end.saturating_sub(1),
                len: self.len(),
            });
        }
        let filled = self
            .filled
            .iter()
            .filter(|&&i| range.contains(&i))
            .map(|&i| i - range.start)
            .collect();
        Self::with_filled(
            self.timestamp(range.start),
            self.interval,
            self.values[range.clone()].to_vec(),
            filled,
        )
    }

    /// Index range of the points whose timestamps fall in `month`.
    pub fn month_range(&self, month: YearMonth) -> Result<Range<usize>> {
        let (lo, hi) = month.bounds();
        let first = self.first_index_at_or_after(lo);
        let end = self.first_index_at_or_after(hi);
        if first >= end {
            return Err(Error::EmptyMonth(month));
        }
        Ok(first..end)
    }

    fn first_index_at_or_after(&self, t: i64) -> usize {
        if t <= self.start {
            return 0;
        }
        let interval = i64::from(self.interval);
        let offset = (t - self.start + interval - 1) / interval;
        usize::try_from(offset).map_or(self.len(), |o| o.min(self.len()))
    }
}

/// Most frequent value; ties go to the smallest.
fn mode(gaps: &[i64]) -> Option<i64> {
    let mut counts = BTreeMap::new();
    for &g in gaps {
        *counts.entry(g).or_insert(0usize) += 1;
    }
    let mut best: Option<(i64, usize)> = None;
    for (g, c) in counts {
        if best.map_or(true, |(_, bc)| c > bc) {
            best = Some((g, c));
        }
    }
    best.map(|(g, _)| g)
}

/// Min-max scaling fitted on a training series.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormalizationParams {
    min: f64,
    max: f64,
}

impl NormalizationParams {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(Error::InvalidNormalization { min, max });
        }
        Ok(NormalizationParams { min, max })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn apply(&self, v: f64) -> f64 {
        (v - self.min) / (self.max - self.min)
    }

    pub fn invert(&self, v: f64) -> f64 {
        v * (self.max - self.min) + self.min
    }
}

pub fn fit_normalization(train: &Series) -> Result<NormalizationParams> {
    let (min, max) = train
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if max <= min {
        return Err(Error::ConstantSeries(min));
    }
    NormalizationParams::new(min, max)
}

/// Scales to the training range. Values outside it are not clamped: the
/// detection rules need the true distance below the prediction.
pub fn normalize(series: &Series, params: &NormalizationParams) -> Series {
    series
        .map_values(|v| params.apply(v))
        .expect("affine map of finite values with max > min stays finite")
}

pub fn denormalize(series: &Series, params: &NormalizationParams) -> Series {
    series
        .map_values(|v| params.invert(v))
        .expect("affine map of finite values stays finite")
}

/// Splits into the points of `train_month` and of `test_month`.
pub fn split_by_month(
    series: &Series,
    train_month: YearMonth,
    test_month: YearMonth,
) -> Result<(Series, Series)> {
    let train = series.month_range(train_month)?;
    let test = series.month_range(test_month)?;
    Ok((series.slice(train)?, series.slice(test)?))
}
