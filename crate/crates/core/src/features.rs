//! Model inputs derived from timestamps and, optionally, past labels.
//!
//! A row is `[weekday one-hot (7), hour one-hot (24), minute-of-hour / 60]`,
//! followed by the lagged derivative `v[t-1] - v[t-2]` when enabled.

use alloc::vec::Vec;

use crate::calendar::CivilTime;
use crate::error::{Error, Result};
use crate::series::Series;

pub const WEEKDAYS: usize = 7;
pub const HOURS: usize = 24;
/// Width of a row without the derivative column.
pub const TIME_WIDTH: usize = WEEKDAYS + HOURS + 1;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub weekday_onehot: [f64; WEEKDAYS],
    pub hour_onehot: [f64; HOURS],
    pub minute_linear: f64,
    pub derivative: Option<f64>,
}

impl FeatureRow {
    /// Monday = 0.
    pub fn weekday(&self) -> usize {
        self.weekday_onehot
            .iter()
            .position(|&x| x == 1.0)
            .unwrap_or(0)
    }

    pub fn hour(&self) -> usize {
        self.hour_onehot.iter().position(|&x| x == 1.0).unwrap_or(0)
    }

    pub fn width(&self) -> usize {
        TIME_WIDTH + usize::from(self.derivative.is_some())
    }

    pub fn extend_into(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.weekday_onehot);
        out.extend_from_slice(&self.hour_onehot);
        out.push(self.minute_linear);
        if let Some(d) = self.derivative {
            out.push(d);
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.width());
        self.extend_into(&mut v);
        v
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureConfig {
    pub use_derivative: bool,
}

impl FeatureConfig {
    pub fn width(&self) -> usize {
        TIME_WIDTH + usize::from(self.use_derivative)
    }

    /// Number of leading points that have no row.
    pub fn warmup(&self) -> usize {
        if self.use_derivative {
            2
        } else {
            0
        }
    }
}

/// Calendar encoding of a unix timestamp in UTC. The derivative is unset.
pub fn encode_time(timestamp: i64) -> FeatureRow {
    let t = CivilTime::from_timestamp(timestamp);
    let mut weekday_onehot = [0.0; WEEKDAYS];
    weekday_onehot[usize::from(t.weekday)] = 1.0;
    let mut hour_onehot = [0.0; HOURS];
    hour_onehot[usize::from(t.hour)] = 1.0;
    FeatureRow {
        weekday_onehot,
        hour_onehot,
        minute_linear: f64::from(t.minute) / 60.0,
        derivative: None,
    }
}

/// `values[t-1] - values[t-2]`; the label at `t` is never read.
pub fn derivative_feature(values: &[f64], t: usize) -> Result<f64> {
    if t < 2 || t > values.len() {
        return Err(Error::TooShort {
            needed: 3,
            got: t.min(values.len()) + 1,
        });
    }
    Ok(values[t - 1] - values[t - 2])
}

/// Rows for a series, aligned so that row `k` describes index
/// `first_index() + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    rows: Vec<FeatureRow>,
    first_index: usize,
    width: usize,
}

impl DesignMatrix {
    pub fn rows(&self) -> &[FeatureRow] {
        &self.rows
    }

    pub fn first_index(&self) -> usize {
        self.first_index
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Series indices covered, in row order.
    pub fn indices(&self) -> core::ops::Range<usize> {
        self.first_index..self.first_index + self.rows.len()
    }

    /// Row-major `len() x width()` buffer.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows.len() * self.width);
        for r in &self.rows {
            r.extend_into(&mut out);
        }
        out
    }
}

pub fn build_design_matrix(series: &Series, cfg: FeatureConfig) -> Result<DesignMatrix> {
    let values = series.values();
    let warmup = cfg.warmup();
    if values.len() <= warmup {
        return Err(Error::TooShort {
            needed: warmup + 1,
            got: values.len(),
        });
    }
    let rows = (warmup..values.len())
        .map(|i| {
            let mut row = encode_time(series.timestamp(i));
            if cfg.use_derivative {
                row.derivative = Some(derivative_feature(values, i)?);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DesignMatrix {
        rows,
        first_index: warmup,
        width: cfg.width(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn epoch_encoding() {
        let r = encode_time(0);
        assert_eq!(r.weekday(), 3);
        assert_eq!(r.hour(), 0);
        assert_eq!(r.minute_linear, 0.0);
        assert_eq!(r.derivative, None);
        assert_eq!(r.width(), 32);
    }

    #[test]
    fn hour_and_minute() {
        let r = encode_time(3600);
        assert_eq!((r.hour(), r.minute_linear), (1, 0.0));
        let r = encode_time(1800);
        assert_eq!((r.hour(), r.minute_linear), (0, 0.5));
    }

    #[test]
    fn derivative_uses_only_past_labels() {
        let v = [0.1, 0.4, 0.9];
        assert!((derivative_feature(&v, 2).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(derivative_feature(&[2.0; 5], 4).unwrap(), 0.0);
        assert!(derivative_feature(&v, 1).is_err());
    }

    #[test]
    fn design_matrix_shapes() {
        let day = Series::new(0, 300, vec![0.5; 288]).unwrap();
        let m = build_design_matrix(&day, FeatureConfig::default()).unwrap();
        assert_eq!((m.len(), m.width(), m.first_index()), (288, 32, 0));
        assert!(m.rows().iter().all(|r| r.width() == 32));

        let m = build_design_matrix(
            &day,
            FeatureConfig {
                use_derivative: true,
            },
        )
        .unwrap();
        assert_eq!((m.len(), m.width(), m.first_index()), (286, 33, 2));
        assert_eq!(m.to_flat().len(), 286 * 33);

        let short = Series::new(0, 300, vec![0.5; 2]).unwrap();
        assert!(build_design_matrix(
            &short,
            FeatureConfig {
                use_derivative: true
            }
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn weekly_periodic_and_one_hot(ts in 0i64..4_000_000_000) {
            let a = encode_time(ts);
            let b = encode_time(ts + 7 * 86_400);
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.weekday_onehot.iter().sum::<f64>(), 1.0);
            prop_assert_eq!(a.hour_onehot.iter().sum::<f64>(), 1.0);
            prop_assert!((0.0..1.0).contains(&a.minute_linear));
        }

        #[test]
        fn label_free_without_derivative(values in prop::collection::vec(-10.0f64..10.0, 1..50)) {
            let s = Series::new(86_400, 300, values.clone()).unwrap();
            let other = s.map_values(|v| v * 3.0 - 1.0).unwrap();
            let cfg = FeatureConfig::default();
            prop_assert_eq!(
                build_design_matrix(&s, cfg).unwrap(),
                build_design_matrix(&other, cfg).unwrap()
            );
        }
    }
}
