use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dropwatch::config::RunConfig;
use dropwatch::csv::{read_series, write_series, CsvOptions};
use dropwatch::flags::{format_filled, parse_filled, read_flags, write_flags};
use dropwatch::labels::{read_labels, sibling_path, write_labels};
use dropwatch::plot::{render_svg, PlotOptions};
use dropwatch::{model_file, pipeline, report};
use dropwatch_core::calendar::{days_from_civil, YearMonth, SECONDS_PER_DAY};
use dropwatch_core::evaluation::{LabeledRegions, Rule};
use dropwatch_core::seed::derive_seed;
use dropwatch_core::synthetic::{self, AnomalySpec, MissingPeakSpec, SyntheticKind, SyntheticSpec};

/// Detects sustained drops in periodic traffic series.
#[derive(Parser)]
#[command(name = "dropwatch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic series, optionally with labeled anomalies.
    Synth(SynthArgs),
    /// Fit a model on the training month and save it.
    Train(TrainArgs),
    /// Run the detection rules over the test month and write a flags file.
    Detect(DetectArgs),
    /// Score a flags file against labels.
    Eval(EvalArgs),
    /// Render a flags file as SVG.
    Plot(PlotArgs),
}

#[derive(Args)]
struct Common {
    /// Run configuration (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed; overrides the `seed` key.
    #[arg(long)]
    seed: Option<u64>,
    /// Override a configuration key, e.g. `--set acc.local_delta=0.05`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn load(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                RunConfig::load(path).with_context(|| format!("reading {}", path.display()))?
            }
            None => RunConfig::default(),
        };
        for o in &self.overrides {
            cfg.apply_override(o)?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Sine,
    #[value(alias = "stepwise_sine", alias = "stepwise")]
    StepwiseSine,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "sine")]
    kind: Kind,
    /// Period in samples.
    #[arg(long, default_value_t = 288)]
    period: usize,
    #[arg(long)]
    length: usize,
    /// Standard deviation of the Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// First timestamp: unix seconds, YYYY-MM-DD or YYYY-MM (UTC).
    #[arg(long, default_value = "0")]
    start: String,
    /// Sampling interval in seconds.
    #[arg(long, default_value_t = 300)]
    interval: u32,
    /// Replace indices START..=END with LEVEL.
    #[arg(long, value_name = "START:END:LEVEL")]
    inject: Vec<String>,
    /// Noise standard deviation inside injected spans.
    #[arg(long, default_value_t = 0.0)]
    anomaly_noise: f64,
    /// Flatten day DAY (counted from the first sample) down to LEVEL.
    #[arg(long, value_name = "DAY:LEVEL")]
    missing_peak: Vec<String>,
    /// Output series; labels go next to it as `<stem>.labels.csv`.
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    /// Series file.
    #[arg(long)]
    data: PathBuf,
    /// baseline, fourier or mlp; overrides the `model` key.
    #[arg(long)]
    model: Option<String>,
    /// Model file to write.
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    common: Common,
    /// Model file written by `train`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Flags file to write. Interpolated indices go to `<stem>.filled.csv`.
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    flags: PathBuf,
    /// Label file; without it every flag is a false positive.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Interpolated indices to leave out; defaults to `<flags stem>.filled.csv` if present.
    #[arg(long)]
    filled: Option<PathBuf>,
    /// Score from the first row instead of after the tail long window.
    #[arg(long)]
    score_all: bool,
    /// JSON report to write.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    flags: PathBuf,
    /// Rule whose flagged regions are shaded.
    #[arg(long, default_value = "intersection")]
    rule: String,
    #[arg(long, default_value_t = 1200.0)]
    width: f64,
    #[arg(long, default_value_t = 400.0)]
    height: f64,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

fn parse_start(s: &str) -> anyhow::Result<i64> {
    if let Ok(t) = s.parse::<i64>() {
        return Ok(t);
    }
    let parts: Vec<&str> = s.split('-').collect();
    if parts.len() == 3 {
        let month: YearMonth = format!("{}-{}", parts[0], parts[1]).parse()?;
        let day: u8 = parts[2]
            .parse()
            .with_context(|| format!("bad day in `{s}`"))?;
        let (from, to) = month.bounds();
        let t = days_from_civil(month.year(), month.month(), day) * SECONDS_PER_DAY;
        if day == 0 || !(from..to).contains(&t) {
            bail!("no day {day} in {month}");
        }
        return Ok(t);
    }
    Ok(s.parse::<YearMonth>()
        .with_context(|| format!("bad start `{s}`"))?
        .start_timestamp())
}

fn fields<'a, const N: usize>(s: &'a str, what: &str) -> anyhow::Result<[&'a str; N]> {
    let parts: Vec<&str> = s.split(':').collect();
    parts
        .try_into()
        .map_err(|_| anyhow::anyhow!("`{s}`: expected {what}"))
}

fn synth(args: &SynthArgs) -> anyhow::Result<()> {
    let cfg = args.common.load()?;
    let kind = match args.kind {
        Kind::Sine => SyntheticKind::Sine,
        Kind::StepwiseSine => SyntheticKind::StepwiseSine,
    };
    let spec = SyntheticSpec {
        kind,
        period_points: args.period,
        length: args.length,
        noise_stddev: args.noise,
        seed: derive_seed(cfg.seed, "synth"),
        start_timestamp: parse_start(&args.start)?,
        interval: args.interval,
    };
    let mut series = synthetic::gen(&spec)?;
    let mut spans = Vec::new();
    for (k, text) in args.inject.iter().enumerate() {
        let [s, e, level] = fields::<3>(text, "START:END:LEVEL")?;
        let mut a = AnomalySpec::span(
            s.parse()
                .with_context(|| format!("bad start in `{text}`"))?,
            e.parse().with_context(|| format!("bad end in `{text}`"))?,
            level
                .parse()
                .with_context(|| format!("bad level in `{text}`"))?,
        )?;
        a.noise_stddev = args.anomaly_noise;
        a.seed = derive_seed(cfg.seed, &format!("inject{k}"));
        let (s, labels) = synthetic::inject(&series, &a)?;
        series = s;
        spans.extend_from_slice(labels.spans());
    }
    for (k, text) in args.missing_peak.iter().enumerate() {
        let [day, level] = fields::<2>(text, "DAY:LEVEL")?;
        let mut m = MissingPeakSpec::new(
            day.parse()
                .with_context(|| format!("bad day in `{text}`"))?,
            level
                .parse()
                .with_context(|| format!("bad level in `{text}`"))?,
        );
        m.noise_stddev = args.anomaly_noise;
        m.seed = derive_seed(cfg.seed, &format!("missing_peak{k}"));
        let (s, labels) = synthetic::missing_peak(&series, &m)?;
        series = s;
        spans.extend_from_slice(labels.spans());
    }
    write_series(&args.output, &series)?;
    if !args.inject.is_empty() || !args.missing_peak.is_empty() {
        spans.sort_unstable();
        let labels = LabeledRegions::new(spans).context("anomaly spans overlap")?;
        write_labels(&sibling_path(&args.output, "labels"), &labels)?;
    }
    Ok(())
}

fn train(args: &TrainArgs) -> anyhow::Result<()> {
    let mut cfg = args.common.load()?;
    if let Some(m) = &args.model {
        cfg.set("model", m)?;
    }
    let series = read_series(
        &args.data,
        CsvOptions {
            header: cfg.header,
            interval: cfg.interval,
        },
    )
    .with_context(|| format!("reading {}", args.data.display()))?;
    let out = pipeline::train(&series, &cfg)?;
    for w in &out.warnings {
        log::warn!("{w}");
    }
    model_file::save(&args.output, &out.artifact)?;
    let show = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.6e}"));
    println!("model: {}", cfg.model);
    println!("train month: {}", out.train_month);
    println!("train mse: {}", show(out.train_mse));
    println!("validation mse: {}", show(out.validation_mse));
    Ok(())
}

fn detect(args: &DetectArgs) -> anyhow::Result<()> {
    let cfg = args.common.load()?;
    let artifact = model_file::load(&args.model)
        .with_context(|| format!("loading {}", args.model.display()))?;
    let series = read_series(
        &args.data,
        CsvOptions {
            header: cfg.header,
            interval: cfg.interval,
        },
    )
    .with_context(|| format!("reading {}", args.data.display()))?;
    let out = pipeline::detect(&artifact, &series, &cfg)?;
    for w in &out.warnings {
        log::warn!("{w}");
    }
    write_flags(&args.output, &out.rows)?;
    let filled_path = sibling_path(&args.output, "filled");
    if out.filled.is_empty() {
        if filled_path.exists() {
            std::fs::remove_file(&filled_path)
                .with_context(|| format!("removing stale {}", filled_path.display()))?;
        }
    } else {
        std::fs::write(&filled_path, format_filled(&out.filled))
            .with_context(|| format!("writing {}", filled_path.display()))?;
    }
    let count =
        |f: fn(&dropwatch::flags::FlagRow) -> bool| out.rows.iter().filter(|r| f(r)).count();
    println!(
        "{}: {} points, flagged accumulator {} tail {} intersection {}",
        out.test_month,
        out.rows.len(),
        count(|r| r.acc_flag),
        count(|r| r.tail_flag),
        count(|r| r.intersect_flag)
    );
    Ok(())
}

fn read_filled(path: &Path) -> anyhow::Result<Vec<usize>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_filled(&text)?)
}

fn eval(args: &EvalArgs) -> anyhow::Result<()> {
    let cfg = args.common.load()?;
    let rows =
        read_flags(&args.flags).with_context(|| format!("reading {}", args.flags.display()))?;
    let labels = match &args.labels {
        Some(p) => read_labels(p).with_context(|| format!("reading {}", p.display()))?,
        None => LabeledRegions::empty(),
    };
    let filled = match &args.filled {
        Some(p) => read_filled(p)?,
        None => {
            let p = sibling_path(&args.flags, "filled");
            if p.exists() {
                read_filled(&p)?
            } else {
                Vec::new()
            }
        }
    };
    let blind = if args.score_all {
        0
    } else {
        cfg.detection.tail.long_window
    };
    let first = rows[0].index;
    let end = first + rows.len();
    if !labels.is_empty() && !labels.spans().iter().any(|&(s, e)| s < end && e >= first) {
        log::warn!("no labeled span falls inside the flagged range {first}..{end}");
    }
    let summary = pipeline::evaluate(&rows, &labels, &filled, blind, None)?;
    print!("{summary}");
    if let Some(out) = &args.output {
        report::write_report(out, &summary)?;
    }
    Ok(())
}

fn plot(args: &PlotArgs) -> anyhow::Result<()> {
    let rows =
        read_flags(&args.flags).with_context(|| format!("reading {}", args.flags.display()))?;
    let rule: Rule = args.rule.parse()?;
    let svg = render_svg(
        &rows,
        &PlotOptions {
            width: args.width,
            height: args.height,
            rule,
        },
    )?;
    std::fs::write(&args.output, svg)
        .with_context(|| format!("writing {}", args.output.display()))?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .format_target(false)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Train(a) => train(a),
        Command::Detect(a) => detect(a),
        Command::Eval(a) => eval(a),
        Command::Plot(a) => plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
