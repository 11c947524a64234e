//! SVG rendering of a flags file: actual values in blue, predictions in
//! green, flagged regions shaded red.

use std::fmt::Write as _;

use dropwatch_core::calendar::CivilTime;
use dropwatch_core::detection::flags_to_regions;
use dropwatch_core::evaluation::Rule;

use crate::error::{Error, Result};
use crate::flags::FlagRow;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotOptions {
    pub width: f64,
    pub height: f64,
    /// Whose flags are shaded.
    pub rule: Rule,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            width: 1200.0,
            height: 400.0,
            rule: Rule::Intersection,
        }
    }
}

const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 60.0;
const X_TICKS: usize = 6;
const Y_TICKS: usize = 5;

struct Frame {
    t0: f64,
    t_span: f64,
    y0: f64,
    y_span: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn x(&self, t: i64) -> f64 {
        LEFT + (t as f64 - self.t0) / self.t_span * self.w
    }

    fn y(&self, v: f64) -> f64 {
        TOP + (1.0 - (v - self.y0) / self.y_span) * self.h
    }
}

fn polyline(
    out: &mut String,
    frame: &Frame,
    rows: &[FlagRow],
    class: &str,
    color: &str,
    v: fn(&FlagRow) -> f64,
) {
    write!(
        out,
        r#"<polyline class="{class}" fill="none" stroke="{color}" stroke-width="1" points=""#
    )
    .unwrap();
    for (k, r) in rows.iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        write!(out, "{:.2},{:.2}", frame.x(r.timestamp), frame.y(v(r))).unwrap();
    }
    out.push_str("\"/>\n");
}

pub fn render_svg(rows: &[FlagRow], opts: &PlotOptions) -> Result<String> {
    let (first, last) = match (rows.first(), rows.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::Mismatch("nothing to plot".into())),
    };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in rows {
        for v in [r.actual, r.prediction] {
            if !v.is_finite() {
                return Err(Error::Mismatch(format!(
                    "non-finite value at index {}",
                    r.index
                )));
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    let step = if rows.len() > 1 {
        (last.timestamp - first.timestamp) / (rows.len() as i64 - 1)
    } else {
        1
    };
    let frame = Frame {
        t0: first.timestamp as f64,
        t_span: ((last.timestamp - first.timestamp) as f64).max(1.0),
        y0: lo - pad,
        y_span: hi - lo + 2.0 * pad,
        w: opts.width - LEFT - RIGHT,
        h: opts.height - TOP - BOTTOM,
    };

    let mut out = String::new();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = opts.width,
        h = opts.height
    )
    .unwrap();
    writeln!(
        out,
        r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
        opts.width, opts.height
    )
    .unwrap();

    let flags: Vec<bool> = rows
        .iter()
        .map(|r| match opts.rule {
            Rule::Accumulator => r.acc_flag,
            Rule::Tail => r.tail_flag,
            Rule::Intersection => r.intersect_flag,
        })
        .collect();
    writeln!(out, r#"<g class="flagged" fill="red" fill-opacity="0.25">"#).unwrap();
    for (s, e) in flags_to_regions(&flags) {
        let x0 = frame.x(rows[s].timestamp);
        let x1 = frame.x(rows[e].timestamp + step).min(LEFT + frame.w);
        writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
            x0,
            TOP,
            (x1 - x0).max(1.0),
            frame.h
        )
        .unwrap();
    }
    out.push_str("</g>\n");

    writeln!(
        out,
        r#"<g class="axes" stroke="black" stroke-width="1" font-family="monospace" font-size="10">"#
    )
    .unwrap();
    let (bottom, right) = (TOP + frame.h, LEFT + frame.w);
    writeln!(
        out,
        r#"<line x1="{LEFT}" y1="{bottom}" x2="{right}" y2="{bottom}"/>"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{bottom}"/>"#
    )
    .unwrap();
    for k in 0..X_TICKS {
        let t = first.timestamp
            + ((last.timestamp - first.timestamp) as f64 * k as f64 / (X_TICKS - 1) as f64) as i64;
        let x = frame.x(t);
        writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{:.2}"/>"#,
            bottom + 4.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" stroke="none" text-anchor="middle">{}</text>"#,
            bottom + 18.0,
            CivilTime::from_timestamp(t)
        )
        .unwrap();
    }
    for k in 0..Y_TICKS {
        let v = frame.y0 + frame.y_span * k as f64 / (Y_TICKS - 1) as f64;
        let y = frame.y(v);
        writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}"/>"#,
            LEFT - 4.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" stroke="none" text-anchor="end">{v:.2}</text>"#,
            LEFT - 6.0,
            y + 3.0
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" stroke="none" text-anchor="middle">time (UTC)</text>"#,
        LEFT + frame.w / 2.0,
        opts.height - 10.0
    )
    .unwrap();
    out.push_str("</g>\n");

    polyline(&mut out, &frame, rows, "actual", "blue", |r| r.actual);
    polyline(&mut out, &frame, rows, "prediction", "green", |r| {
        r.prediction
    });
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(n: usize, flagged: &[usize]) -> Vec<FlagRow> {
        (0..n)
            .map(|i| FlagRow {
                index: i,
                timestamp: 1_490_000_000 + 300 * i as i64,
                prediction: (i as f64 / 10.0).sin(),
                actual: (i as f64 / 10.0).cos(),
                acc_flag: false,
                tail_likelihood: 0.0,
                tail_flag: false,
                intersect_flag: flagged.contains(&i),
            })
            .collect()
    }

    #[test]
    fn structure() {
        let svg = render_svg(&rows(100, &[]), &PlotOptions::default()).unwrap();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains(r#"version="1.1""#));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(r#"stroke="blue""#) && svg.contains(r#"stroke="green""#));
        assert_eq!(svg.matches("<rect").count(), 1, "background only");
        assert!(svg.contains("2017-03-20"));
    }

    #[test]
    fn one_rect_per_region() {
        let svg = render_svg(&rows(100, &[10, 11, 12, 50, 99]), &PlotOptions::default()).unwrap();
        assert_eq!(svg.matches("<rect").count(), 1 + 3);
        let acc = PlotOptions {
            rule: Rule::Accumulator,
            ..Default::default()
        };
        assert_eq!(
            render_svg(&rows(100, &[10]), &acc)
                .unwrap()
                .matches("<rect")
                .count(),
            1
        );
    }

    #[test]
    fn deterministic_and_rejects_empty() {
        let r = rows(37, &[3]);
        assert_eq!(
            render_svg(&r, &PlotOptions::default()).unwrap(),
            render_svg(&r, &PlotOptions::default()).unwrap()
        );
        assert!(render_svg(&[], &PlotOptions::default()).is_err());
        let single = rows(1, &[0]);
        assert!(render_svg(&single, &PlotOptions::default()).is_ok());
    }
}
