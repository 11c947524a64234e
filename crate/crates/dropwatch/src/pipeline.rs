//! Train, detect and evaluate as library calls; the CLI is a thin wrapper.

use std::ops::Range;

use dropwatch_core::calendar::YearMonth;
use dropwatch_core::detection::run_rules;
use dropwatch_core::evaluation::{
    summarize, LabeledRegions, MseSummary, Rule, ScoredRange, Summary,
};
use dropwatch_core::features::build_design_matrix;
use dropwatch_core::predictors::{
    fourier_train, mlp_train, mse, predict_series, Model, ModelKind, TrainingData,
};
use dropwatch_core::series::{fit_normalization, normalize, Series};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::flags::FlagRow;
use crate::model_file::ModelArtifact;

/// Training and test months, filling `auto` from the data.
pub fn resolve_months(series: &Series, cfg: &RunConfig) -> (YearMonth, YearMonth) {
    let train = cfg
        .train_month
        .unwrap_or_else(|| YearMonth::of_timestamp(series.start()));
    let test = cfg.test_month.unwrap_or_else(|| train.next());
    (train, test)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub artifact: ModelArtifact,
    pub train_month: YearMonth,
    /// `None` for the baseline, which is not trained.
    pub train_mse: Option<f64>,
    /// MSE over the test month when the data contains it.
    pub validation_mse: Option<f64>,
    pub loss_history: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Normalizes with training-month statistics and fits the configured model.
pub fn train(series: &Series, cfg: &RunConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let (train_month, test_month) = resolve_months(series, cfg);
    let range = series.month_range(train_month)?;
    let train = series.slice(range.clone())?;
    let normalization = fit_normalization(&train)?;
    let train_n = normalize(&train, &normalization);
    let mut warnings = Vec::new();
    let features = cfg.features;

    let (model, train_mse, loss_history) = match cfg.model {
        ModelKind::Baseline => (Model::Baseline(cfg.baseline), None, Vec::new()),
        ModelKind::Fourier => {
            let report = fourier_train(&train_n, &cfg.fourier_config())?;
            if !report.covers_full_period {
                warnings.push(format!(
                    "training month has fewer than {} points; some phases of the period are unseen",
                    cfg.fourier.period_points
                ));
            }
            (
                Model::Fourier(report.model),
                Some(report.train_mse),
                report.loss_history,
            )
        }
        ModelKind::Mlp => {
            let design = build_design_matrix(&train_n, features)?;
            let data = TrainingData::new(&train_n, &design)?;
            let report = mlp_train(&data, &cfg.mlp_config())?;
            (
                Model::Mlp(report.model),
                Some(report.train_mse),
                report.loss_history,
            )
        }
    };
    let artifact = ModelArtifact {
        model,
        normalization,
        features,
    };

    let validation_mse = match series.month_range(test_month) {
        Ok(test) => {
            let full = normalize(series, &normalization);
            let (covered, preds) = predict_range(&artifact, &full, test)?;
            Some(mse(&preds, &full.values()[covered])?)
        }
        Err(_) => None,
    };
    Ok(TrainOutcome {
        artifact,
        train_month,
        train_mse,
        validation_mse,
        loss_history,
        warnings,
    })
}

/// Predictions for `range` of an already normalized series. Derivative
/// features borrow up to two points before the range as context; the
/// returned range is the part actually covered.
pub fn predict_range(
    artifact: &ModelArtifact,
    normalized: &Series,
    range: Range<usize>,
) -> Result<(Range<usize>, Vec<f64>)> {
    let ctx = range.start.saturating_sub(artifact.features.warmup());
    let sub = normalized.slice(ctx..range.end)?;
    let design = build_design_matrix(&sub, artifact.features)?;
    if let Model::Mlp(m) = &artifact.model {
        if m.input_width() != design.width() {
            return Err(Error::Mismatch(format!(
                "model expects {} inputs, features provide {}",
                m.input_width(),
                design.width()
            )));
        }
    }
    let preds = predict_series(&artifact.model, &sub, &design)?;
    Ok((ctx + design.first_index()..range.end, preds))
}

#[derive(Debug, Clone)]
pub struct DetectOutcome {
    pub test_month: YearMonth,
    pub rows: Vec<FlagRow>,
    /// Interpolated indices inside the detected range.
    pub filled: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Runs all three rules over the test month.
pub fn detect(artifact: &ModelArtifact, series: &Series, cfg: &RunConfig) -> Result<DetectOutcome> {
    cfg.detection.validate()?;
    let (_, test_month) = resolve_months(series, cfg);
    let range = series.month_range(test_month)?;
    let normalized = normalize(series, &artifact.normalization);
    let (covered, preds) = predict_range(artifact, &normalized, range.clone())?;
    let mut warnings = Vec::new();
    if covered.start != range.start {
        warnings.push(format!(
            "no context before {test_month}; the first {} points are not scored",
            covered.start - range.start
        ));
    }
    let w1 = cfg.detection.tail.long_window;
    if covered.len() <= w1 {
        warnings.push(format!(
            "test range has {} points, not more than the tail long window ({w1}); the tail rule cannot flag",
            covered.len()
        ));
    }
    let actuals = &normalized.values()[covered.clone()];
    let out = run_rules(&preds, actuals, &cfg.detection)?;
    let rows = covered
        .clone()
        .enumerate()
        .map(|(k, i)| FlagRow {
            index: i,
            timestamp: series.timestamp(i),
            prediction: preds[k],
            actual: actuals[k],
            acc_flag: out.accumulator_flags[k],
            tail_likelihood: out.tail_likelihood[k],
            tail_flag: out.tail_flags[k],
            intersect_flag: out.intersection_flags[k],
        })
        .collect();
    let filled = series
        .filled()
        .iter()
        .copied()
        .filter(|i| covered.contains(i))
        .collect();
    Ok(DetectOutcome {
        test_month,
        rows,
        filled,
        warnings,
    })
}

/// Point-level confusion matrices of the three rules.
///
/// The first `blind` rows are not scored (the tail rule cannot flag there),
/// nor are interpolated points. Labels use series indices, like the rows.
pub fn evaluate(
    rows: &[FlagRow],
    labels: &LabeledRegions,
    filled: &[usize],
    blind: usize,
    train_mse: Option<f64>,
) -> Result<Summary> {
    let first = rows
        .first()
        .ok_or_else(|| Error::Mismatch("flags file has no rows".into()))?
        .index;
    for (k, r) in rows.iter().enumerate() {
        if r.index != first + k {
            return Err(Error::Mismatch(format!(
                "flag row {k} has index {}, expected {}",
                r.index,
                first + k
            )));
        }
    }
    let end = first + rows.len();
    let len = labels.spans().last().map_or(end, |&(_, e)| end.max(e + 1));
    let dense = |f: fn(&FlagRow) -> bool| {
        let mut v = vec![false; len];
        for r in rows {
            v[r.index] = f(r);
        }
        v
    };
    let acc = dense(|r| r.acc_flag);
    let tail = dense(|r| r.tail_flag);
    let both = dense(|r| r.intersect_flag);
    let scored = ScoredRange::new((first + blind).min(end)..end).excluding(filled);

    let (p, a): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| scored.contains(r.index))
        .map(|r| (r.prediction, r.actual))
        .unzip();
    let validation = if p.is_empty() {
        None
    } else {
        Some(mse(&p, &a)?)
    };
    Ok(summarize(
        &[
            (Rule::Accumulator, &acc),
            (Rule::Tail, &tail),
            (Rule::Intersection, &both),
        ],
        labels,
        &scored,
        MseSummary {
            train: train_mse,
            validation,
        },
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dropwatch_core::calendar::YearMonth;
    use dropwatch_core::synthetic::{gen, SyntheticKind, SyntheticSpec};

    fn two_months() -> Series {
        let start = YearMonth::new(2017, 4).unwrap().start_timestamp();
        let spec = SyntheticSpec {
            start_timestamp: start,
            ..SyntheticSpec::new(SyntheticKind::Sine, 61 * 288)
        };
        gen(&spec).unwrap()
    }

    fn fast() -> RunConfig {
        let mut c = RunConfig::default();
        c.apply_text("fourier.period = 288\nfourier.harmonics = 2\nfourier.steps = 500\n")
            .unwrap();
        c
    }

    #[test]
    fn auto_months() {
        let (train, test) = resolve_months(&two_months(), &RunConfig::default());
        assert_eq!(
            (train.to_string(), test.to_string()),
            ("2017-04".into(), "2017-05".into())
        );
    }

    #[test]
    fn train_detect_evaluate_clean() {
        let s = two_months();
        let cfg = fast();
        let t = train(&s, &cfg).unwrap();
        assert!(t.train_mse.unwrap() < 1e-2);
        assert!(t.validation_mse.unwrap() < 1e-2);
        let d = detect(&t.artifact, &s, &cfg).unwrap();
        assert_eq!(d.rows.len(), 31 * 288);
        assert_eq!(d.rows[0].index, 30 * 288);
        assert!(d.warnings.is_empty(), "{:?}", d.warnings);
        let summary = evaluate(
            &d.rows,
            &LabeledRegions::empty(),
            &d.filled,
            2016,
            t.train_mse,
        )
        .unwrap();
        let m = summary.rule(Rule::Intersection).unwrap().confusion;
        assert_eq!(m.total(), 31 * 288 - 2016);
        assert_eq!(m.true_positives + m.false_negatives, 0);
    }

    #[test]
    fn missing_months_are_named() {
        let s = two_months();
        let mut cfg = fast();
        cfg.set("split.train_month", "2016-01").unwrap();
        let err = train(&s, &cfg).unwrap_err().to_string();
        assert!(err.contains("2016-01"), "{err}");
        let t = train(&s, &fast()).unwrap();
        cfg.set("split.test_month", "2018-02").unwrap();
        assert!(detect(&t.artifact, &s, &cfg)
            .unwrap_err()
            .to_string()
            .contains("2018-02"));
    }

    #[test]
    fn short_test_month_warns() {
        let start = YearMonth::new(2017, 4).unwrap().start_timestamp();
        let spec = SyntheticSpec {
            start_timestamp: start,
            ..SyntheticSpec::new(SyntheticKind::Sine, 37 * 288)
        };
        let s = gen(&spec).unwrap();
        let cfg = fast();
        let t = train(&s, &cfg).unwrap();
        let d = detect(&t.artifact, &s, &cfg).unwrap();
        assert_eq!(d.rows.len(), 7 * 288);
        assert!(d.rows.iter().all(|r| !r.tail_flag));
        assert!(d.warnings.iter().any(|w| w.contains("tail")));
    }

    #[test]
    fn baseline_is_not_trained() {
        let s = two_months();
        let mut cfg = fast();
        cfg.set("model", "baseline").unwrap();
        let t = train(&s, &cfg).unwrap();
        assert_eq!(
            t.artifact.model,
            Model::Baseline(dropwatch_core::predictors::BaselineModel::new(0.065))
        );
        assert_eq!(t.train_mse, None);
    }

    #[test]
    fn evaluate_rejects_gaps() {
        let s = two_months();
        let cfg = fast();
        let t = train(&s, &cfg).unwrap();
        let mut rows = detect(&t.artifact, &s, &cfg).unwrap().rows;
        rows.remove(5);
        assert!(evaluate(&rows, &LabeledRegions::empty(), &[], 0, None).is_err());
    }
}
