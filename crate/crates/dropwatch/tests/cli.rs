use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dropwatch::flags::read_flags;
use dropwatch::model_file;
use dropwatch::report::read_report;
use dropwatch_core::evaluation::Rule;
use dropwatch_core::predictors::{BaselineModel, Model};

fn dw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dropwatch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = dw(args);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails(args: &[&str]) -> String {
    let out = dw(args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    assert!(out.stdout.is_empty(), "errors must not go to stdout");
    String::from_utf8(out.stderr).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn demo_conf() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/demo.conf")
}

/// Two months of sine from April 2017 with May 21st flattened.
fn demo_data(dir: &Path) -> PathBuf {
    let data = dir.join("demo.csv");
    ok(&[
        "synth",
        "--kind",
        "sine",
        "--length",
        "17568",
        "--start",
        "2017-04",
        "--noise",
        "0.01",
        "--missing-peak",
        "50:0.05",
        "--seed",
        "7",
        "-o",
        s(&data),
    ]);
    data
}

#[test]
fn synth_writes_series_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    ok(&[
        "synth",
        "--kind",
        "sine",
        "--period",
        "288",
        "--length",
        "8640",
        "--seed",
        "7",
        "-o",
        s(&out),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 8640);
    assert!(!dir.path().join("s.labels.csv").exists());

    ok(&[
        "synth",
        "--length",
        "8640",
        "--inject",
        "4000:4100:0.0",
        "-o",
        s(&out),
    ]);
    assert_eq!(
        std::fs::read_to_string(dir.path().join("s.labels.csv")).unwrap(),
        "4000,4100\n"
    );
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().nth(4050).unwrap(), "1215000,0");
}

#[test]
fn synth_rejects_bad_arguments() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let err = fails(&["synth", "--kind", "bogus", "--length", "10", "-o", s(&out)]);
    assert!(err.contains("bogus"), "{err}");
    assert!(!out.exists());
    let err = fails(&[
        "synth",
        "--length",
        "10",
        "--inject",
        "5:50:0",
        "-o",
        s(&out),
    ]);
    assert!(err.contains("error"), "{err}");
    let err = fails(&["synth", "--length", "10", "--inject", "5-6", "-o", s(&out)]);
    assert!(err.contains("START:END:LEVEL"), "{err}");
}

fn pipeline(dir: &Path) -> [PathBuf; 4] {
    let conf = demo_conf();
    let data = demo_data(dir);
    let model = dir.join("demo.model");
    let flags = dir.join("demo.flags.csv");
    let report = dir.join("report.json");
    let svg = dir.join("demo.svg");
    let stdout = ok(&[
        "train",
        "--config",
        s(&conf),
        "--data",
        s(&data),
        "-o",
        s(&model),
    ]);
    assert!(stdout.contains("train mse"), "{stdout}");
    ok(&[
        "detect",
        "--config",
        s(&conf),
        "--model",
        s(&model),
        "--data",
        s(&data),
        "-o",
        s(&flags),
    ]);
    let labels = dir.join("demo.labels.csv");
    let table = ok(&[
        "eval",
        "--config",
        s(&conf),
        "--flags",
        s(&flags),
        "--labels",
        s(&labels),
        "-o",
        s(&report),
    ]);
    assert!(table.contains("intersection"), "{table}");
    ok(&["plot", "--flags", s(&flags), "-o", s(&svg)]);
    [model, flags, report, svg]
}

#[test]
fn demo_pipeline_end_to_end_and_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = pipeline(a.path());
    let second = pipeline(b.path());
    for (x, y) in first.iter().zip(&second) {
        assert_eq!(
            std::fs::read(x).unwrap(),
            std::fs::read(y).unwrap(),
            "{} differs",
            x.display()
        );
    }

    let [model, flags, report, svg] = first;
    assert!(matches!(
        model_file::load(&model).unwrap().model,
        Model::Fourier(_)
    ));
    let rows = read_flags(&flags).unwrap();
    assert_eq!(rows.len(), 31 * 288);
    let summary = read_report(&report).unwrap();
    assert_eq!(summary.rules.len(), 3);
    let both = summary.rule(Rule::Intersection).unwrap();
    assert!(both.confusion.true_positives > 0);
    assert_eq!(both.confusion.false_positives, 0);
    let svg = std::fs::read_to_string(svg).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert_eq!(svg.matches("<rect").count(), 1 + both.regions.len());
}

#[test]
fn train_baseline_and_missing_month() {
    let dir = tempfile::tempdir().unwrap();
    let data = demo_data(dir.path());
    let model = dir.path().join("b.model");
    let stdout = ok(&[
        "train",
        "--model",
        "baseline",
        "--data",
        s(&data),
        "-o",
        s(&model),
    ]);
    assert!(stdout.contains("train mse: n/a"), "{stdout}");
    let artifact = model_file::load(&model).unwrap();
    assert_eq!(artifact.model, Model::Baseline(BaselineModel::new(0.065)));

    let err = fails(&[
        "train",
        "--set",
        "split.train_month=2016-01",
        "--data",
        s(&data),
        "-o",
        s(&model),
    ]);
    assert!(err.contains("2016-01"), "{err}");
    let err = fails(&[
        "train",
        "--set",
        "fourier.steps=lots",
        "--data",
        s(&data),
        "-o",
        s(&model),
    ]);
    assert!(err.contains("fourier.steps"), "{err}");
}

#[test]
fn eval_without_labels_and_with_bad_labels() {
    let dir = tempfile::tempdir().unwrap();
    let [_, flags, _, _] = pipeline(dir.path());
    let report = dir.path().join("empty.json");
    ok(&["eval", "--flags", s(&flags), "-o", s(&report)]);
    let summary = read_report(&report).unwrap();
    for rule in Rule::ALL {
        let m = summary.rule(rule).unwrap().confusion;
        assert_eq!((m.true_positives, m.false_negatives), (0, 0));
        assert_eq!(m.false_positives + m.true_negatives, summary.scored_points);
    }

    let bad = dir.path().join("bad.labels.csv");
    std::fs::write(&bad, "14400,14500\nfoo,bar\n").unwrap();
    let err = fails(&["eval", "--flags", s(&flags), "--labels", s(&bad)]);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn short_test_month_warns_and_tail_stays_silent() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("short.csv");
    // April plus the first week of May.
    ok(&[
        "synth",
        "--length",
        "10656",
        "--start",
        "2017-04",
        "-o",
        s(&data),
    ]);
    let conf = demo_conf();
    let model = dir.path().join("m.model");
    let flags = dir.path().join("f.csv");
    ok(&[
        "train",
        "--config",
        s(&conf),
        "--data",
        s(&data),
        "-o",
        s(&model),
    ]);
    let out = dw(&[
        "detect",
        "--config",
        s(&conf),
        "--model",
        s(&model),
        "--data",
        s(&data),
        "-o",
        s(&flags),
    ]);
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("tail"), "{err}");
    let rows = read_flags(&flags).unwrap();
    assert_eq!(rows.len(), 2016);
    assert!(rows.iter().all(|r| !r.tail_flag && !r.intersect_flag));

    let svg = dir.path().join("f.svg");
    ok(&["plot", "--flags", s(&flags), "-o", s(&svg)]);
    assert_eq!(
        std::fs::read_to_string(&svg)
            .unwrap()
            .matches("<rect")
            .count(),
        1
    );
}

#[test]
fn gaps_are_filled_and_not_scored() {
    let dir = tempfile::tempdir().unwrap();
    let full = demo_data(dir.path());
    let text = std::fs::read_to_string(&full).unwrap();
    // Drop three May samples.
    let gappy: String = text
        .lines()
        .enumerate()
        .filter(|(i, _)| !(9000..9003).contains(i))
        .map(|(_, l)| format!("{l}\n"))
        .collect();
    let data = dir.path().join("gappy.csv");
    std::fs::write(&data, gappy).unwrap();
    let conf = demo_conf();
    let model = dir.path().join("m.model");
    let flags = dir.path().join("g.csv");
    ok(&[
        "train",
        "--config",
        s(&conf),
        "--data",
        s(&data),
        "-o",
        s(&model),
    ]);
    ok(&[
        "detect",
        "--config",
        s(&conf),
        "--model",
        s(&model),
        "--data",
        s(&data),
        "-o",
        s(&flags),
    ]);
    assert_eq!(
        std::fs::read_to_string(dir.path().join("g.filled.csv")).unwrap(),
        "9000\n9001\n9002\n"
    );
    let report = dir.path().join("r.json");
    ok(&[
        "eval",
        "--score-all",
        "--flags",
        s(&flags),
        "-o",
        s(&report),
    ]);
    assert_eq!(read_report(&report).unwrap().scored_points, 31 * 288 - 3);
}

#[test]
fn detect_rejects_a_non_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = demo_data(dir.path());
    let err = fails(&[
        "detect",
        "--model",
        s(&data),
        "--data",
        s(&data),
        "-o",
        s(&dir.path().join("f.csv")),
    ]);
    assert!(err.contains("magic"), "{err}");
}
