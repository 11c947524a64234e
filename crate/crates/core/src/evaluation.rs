//! Point-level scoring against labeled anomaly spans, and the cross-stream
//! correlation check.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use crate::detection::{flags_to_regions, Region};
use crate::error::{Error, Result};

/// Sorted, non-overlapping inclusive ground-truth spans.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LabeledRegions {
    spans: Vec<Region>,
}

impl LabeledRegions {
    pub fn new(spans: Vec<Region>) -> Result<Self> {
        let mut prev_end: Option<usize> = None;
        for &(start, end) in &spans {
            if start > end || prev_end.is_some_and(|p| start <= p) {
                return Err(Error::InvalidLabels { start, end });
            }
            prev_end = Some(end);
        }
        Ok(LabeledRegions { spans })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn spans(&self) -> &[Region] {
        &self.spans
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        let k = self.spans.partition_point(|&(start, _)| start <= index);
        k > 0 && index <= self.spans[k - 1].1
    }

    /// Errors if any span reaches past `len` points.
    pub fn check_within(&self, len: usize) -> Result<()> {
        match self.spans.last() {
            Some(&(start, end)) if end >= len => Err(Error::LabelOutOfRange { start, end, len }),
            _ => Ok(()),
        }
    }

    pub fn labeled_points(&self) -> usize {
        self.spans.iter().map(|(s, e)| e - s + 1).sum()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfusionMatrix {
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }

    /// False positives plus false negatives.
    pub fn errors(&self) -> usize {
        self.false_positives + self.false_negatives
    }
}

/// Indices that take part in scoring: a range minus excluded points
/// (interpolated gaps).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoredRange {
    range: Range<usize>,
    excluded: Vec<usize>,
}

impl ScoredRange {
    pub fn new(range: Range<usize>) -> Self {
        ScoredRange {
            range,
            excluded: Vec::new(),
        }
    }

    /// Points `[skip, len)`, i.e. everything after a blind window of `skip`.
    pub fn after_warmup(len: usize, skip: usize) -> Self {
        Self::new(skip.min(len)..len)
    }

    pub fn excluding(mut self, indices: &[usize]) -> Self {
        self.excluded
            .extend(indices.iter().copied().filter(|i| self.range.contains(i)));
        self.excluded.sort_unstable();
        self.excluded.dedup();
        self
    }

    pub fn range(&self) -> Range<usize> {
        self.range.clone()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.range.contains(&index) && self.excluded.binary_search(&index).is_err()
    }

    pub fn len(&self) -> usize {
        self.range.len() - self.excluded.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.range
            .clone()
            .filter(move |&i| self.excluded.binary_search(&i).is_err())
    }
}

/// Counts every scored point into one of the four cells.
pub fn confusion(
    flags: &[bool],
    labels: &LabeledRegions,
    scored: &ScoredRange,
) -> Result<ConfusionMatrix> {
    labels.check_within(flags.len())?;
    if scored.range().end > flags.len() {
        return Err(Error::LengthMismatch {
            left: flags.len(),
            right: scored.range().end,
        });
    }
    let mut m = ConfusionMatrix::default();
    for i in scored.iter() {
        match (flags[i], labels.contains(i)) {
            (true, true) => m.true_positives += 1,
            (true, false) => m.false_positives += 1,
            (false, true) => m.false_negatives += 1,
            (false, false) => m.true_negatives += 1,
        }
    }
    Ok(m)
}

/// Symmetric matrix of Pearson coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    size: usize,
    values: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.size..(i + 1) * self.size]
    }
}

/// Pearson correlation between every pair of equally long streams.
pub fn correlation_matrix(streams: &[&[f64]]) -> Result<CorrelationMatrix> {
    let size = streams.len();
    let len = streams.first().map_or(0, |s| s.len());
    if size < 2 || len < 3 {
        return Err(Error::NotEnoughStreams);
    }
    let mut centered = Vec::with_capacity(size);
    let mut norms = Vec::with_capacity(size);
    for (k, s) in streams.iter().enumerate() {
        if s.len() != len {
            return Err(Error::LengthMismatch {
                left: len,
                right: s.len(),
            });
        }
        let mean = s.iter().sum::<f64>() / len as f64;
        let c: Vec<f64> = s.iter().map(|x| x - mean).collect();
        let norm = libm::sqrt(c.iter().map(|x| x * x).sum::<f64>());
        if norm == 0.0 {
            return Err(Error::ConstantStream(k));
        }
        centered.push(c);
        norms.push(norm);
    }
    let mut values = alloc::vec![0.0; size * size];
    for i in 0..size {
        values[i * size + i] = 1.0;
        for j in i + 1..size {
            let dot: f64 = centered[i]
                .iter()
                .zip(&centered[j])
                .map(|(a, b)| a * b)
                .sum();
            let r = (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            values[i * size + j] = r;
            values[j * size + i] = r;
        }
    }
    Ok(CorrelationMatrix { size, values })
}

/// The three detection rules, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rule {
    Accumulator,
    Tail,
    Intersection,
}

impl Rule {
    pub const ALL: [Rule; 3] = [Rule::Accumulator, Rule::Tail, Rule::Intersection];

    pub fn key(self) -> &'static str {
        match self {
            Rule::Accumulator => "accumulator",
            Rule::Tail => "tail",
            Rule::Intersection => "intersection",
        }
    }
}

impl core::str::FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL
            .into_iter()
            .find(|r| r.key() == s.trim())
            .ok_or_else(|| {
                crate::error::invalid("rule", "expected accumulator, tail or intersection")
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RuleSummary {
    pub confusion: ConfusionMatrix,
    /// Flagged runs over the whole flag sequence.
    pub regions: Vec<Region>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MseSummary {
    pub train: Option<f64>,
    pub validation: Option<f64>,
}

/// Everything a run reports: per-rule matrices and regions, plus losses.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Summary {
    pub scored_points: usize,
    pub labels: Vec<Region>,
    pub rules: BTreeMap<String, RuleSummary>,
    pub mse: MseSummary,
}

impl Summary {
    pub fn rule(&self, rule: Rule) -> Option<&RuleSummary> {
        self.rules.get(rule.key())
    }
}

pub fn summarize(
    rules: &[(Rule, &[bool])],
    labels: &LabeledRegions,
    scored: &ScoredRange,
    mse: MseSummary,
) -> Result<Summary> {
    let mut out = BTreeMap::new();
    for &(rule, flags) in rules {
        let confusion = confusion(flags, labels, scored)?;
        out.insert(
            rule.key().to_string(),
            RuleSummary {
                confusion,
                regions: flags_to_regions(flags),
            },
        );
    }
    Ok(Summary {
        scored_points: scored.len(),
        labels: labels.spans().to_vec(),
        rules: out,
        mse,
    })
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "scored points: {}   labeled spans: {}",
            self.scored_points,
            self.labels.len()
        )?;
        let present: Vec<Rule> = Rule::ALL
            .into_iter()
            .filter(|r| self.rule(*r).is_some())
            .collect();
        write!(f, "{:<16}", "")?;
        for r in &present {
            write!(f, "{:>14}", r.key())?;
        }
        writeln!(f)?;
        type Cell = fn(&ConfusionMatrix) -> usize;
        let rows: [(&str, Cell); 4] = [
            ("true negatives", |m| m.true_negatives),
            ("false negatives", |m| m.false_negatives),
            ("true positives", |m| m.true_positives),
            ("false positives", |m| m.false_positives),
        ];
        for (name, cell) in rows {
            write!(f, "{name:<16}")?;
            for r in &present {
                write!(
                    f,
                    "{:>14}",
                    cell(&self.rule(*r).expect("present").confusion)
                )?;
            }
            writeln!(f)?;
        }
        write!(f, "{:<16}", "flagged regions")?;
        for r in &present {
            write!(f, "{:>14}", self.rule(*r).expect("present").regions.len())?;
        }
        writeln!(f)?;
        let fmt_mse = |v: Option<f64>| match v {
            Some(x) => alloc::format!("{x:.6}"),
            None => "n/a".to_string(),
        };
        writeln!(
            f,
            "mse train: {}   validation: {}",
            fmt_mse(self.mse.train),
            fmt_mse(self.mse.validation)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::intersect;
    use alloc::vec;
    use core::f64::consts::TAU;
    use proptest::prelude::*;

    const T: bool = true;
    const F: bool = false;

    #[test]
    fn confusion_examples() {
        let all = ScoredRange::new(0..100);
        let m = confusion(&[F; 100], &LabeledRegions::empty(), &all).unwrap();
        assert_eq!(
            m,
            ConfusionMatrix {
                true_negatives: 100,
                ..Default::default()
            }
        );

        let labels = LabeledRegions::new(vec![(0, 1)]).unwrap();
        let m = confusion(&[T, T, F, F], &labels, &ScoredRange::new(0..4)).unwrap();
        assert_eq!((m.true_positives, m.true_negatives, m.total()), (2, 2, 4));

        let m = confusion(&[T, F, T, F], &labels, &ScoredRange::new(0..4)).unwrap();
        assert_eq!(
            m,
            ConfusionMatrix {
                true_positives: 1,
                false_negatives: 1,
                false_positives: 1,
                true_negatives: 1
            }
        );
    }

    #[test]
    fn labels_out_of_range() {
        let labels = LabeledRegions::new(vec![(2, 9)]).unwrap();
        assert!(matches!(
            confusion(&[F; 5], &labels, &ScoredRange::new(0..5)),
            Err(Error::LabelOutOfRange { .. })
        ));
        assert!(LabeledRegions::new(vec![(3, 5), (5, 6)]).is_err());
        assert!(LabeledRegions::new(vec![(3, 2)]).is_err());
    }

    #[test]
    fn scored_range_excludes_warmup_and_gaps() {
        let flags = vec![T; 10];
        let scored = ScoredRange::after_warmup(10, 4).excluding(&[1, 6, 6, 12]);
        assert_eq!(scored.len(), 5);
        let m = confusion(&flags, &LabeledRegions::empty(), &scored).unwrap();
        assert_eq!(m.false_positives, 5);
        assert!(ScoredRange::after_warmup(3, 2016).is_empty());
    }

    #[test]
    fn correlation_examples() {
        let a: Vec<f64> = (0..50)
            .map(|i| libm::sin(i as f64 * 0.3) + 0.01 * i as f64)
            .collect();
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        let m = correlation_matrix(&[&a, &a, &neg]).unwrap();
        assert_eq!(m.get(0, 0), 1.0);
        assert!((m.get(0, 1) - 1.0).abs() < 1e-12);
        assert!((m.get(0, 2) + 1.0).abs() < 1e-12);

        assert_eq!(
            correlation_matrix(&[&a, &[1.0; 50]]),
            Err(Error::ConstantStream(1))
        );
        assert_eq!(correlation_matrix(&[&a]), Err(Error::NotEnoughStreams));
    }

    #[test]
    fn quadrature_components_are_uncorrelated() {
        let n = 288 * 3;
        let s: Vec<f64> = (0..n).map(|t| libm::sin(TAU * t as f64 / 288.0)).collect();
        let c: Vec<f64> = (0..n).map(|t| libm::cos(TAU * t as f64 / 288.0)).collect();
        // Brute-force oracle: plain dot product of the raw components.
        let dot: f64 = s.iter().zip(&c).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-9);
        let m = correlation_matrix(&[&s, &c]).unwrap();
        assert!(m.get(0, 1).abs() < 1e-6);
    }

    #[test]
    fn summary_has_one_matrix_per_rule() {
        let acc = [T, T, F, F];
        let tail = [F, T, T, F];
        let both = intersect(&acc, &tail).unwrap();
        let s = summarize(
            &[
                (Rule::Accumulator, &acc),
                (Rule::Tail, &tail),
                (Rule::Intersection, &both),
            ],
            &LabeledRegions::empty(),
            &ScoredRange::new(0..4),
            MseSummary::default(),
        )
        .unwrap();
        assert_eq!(s.rules.len(), 3);
        for r in Rule::ALL {
            let m = s.rule(r).unwrap().confusion;
            assert_eq!(m.true_positives + m.false_negatives, 0);
        }
        assert_eq!(s.rule(Rule::Intersection).unwrap().regions, vec![(1, 1)]);
        let text = alloc::format!("{s}");
        assert!(text.contains("intersection"));
        assert!(text.contains("false positives"));
    }

    proptest! {
        #[test]
        fn cells_sum_and_intersection_fp_bound(
            pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..300),
            label_start in 0usize..300,
            label_len in 0usize..50,
            skip in 0usize..50,
        ) {
            let (a, b): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
            let n = a.len();
            let labels = if label_start < n {
                LabeledRegions::new(vec![(label_start, (label_start + label_len).min(n - 1))]).unwrap()
            } else {
                LabeledRegions::empty()
            };
            let scored = ScoredRange::after_warmup(n, skip);
            let both = intersect(&a, &b).unwrap();
            let ma = confusion(&a, &labels, &scored).unwrap();
            let mb = confusion(&b, &labels, &scored).unwrap();
            let mi = confusion(&both, &labels, &scored).unwrap();
            prop_assert_eq!(ma.total(), scored.len());
            prop_assert_eq!(mi.total(), scored.len());
            prop_assert!(mi.false_positives <= ma.false_positives.min(mb.false_positives));
            prop_assert!(mi.true_positives <= ma.true_positives.min(mb.true_positives));
        }

        #[test]
        fn correlation_is_symmetric_with_unit_diagonal(
            data in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 8), 2..5)
        ) {
            let refs: Vec<&[f64]> = data.iter().map(|v| v.as_slice()).collect();
            if let Ok(m) = correlation_matrix(&refs) {
                for i in 0..m.size() {
                    prop_assert_eq!(m.get(i, i), 1.0);
                    for j in 0..m.size() {
                        prop_assert!((m.get(i, j) - m.get(j, i)).abs() <= 1e-12);
                    }
                }
            }
        }
    }
}
