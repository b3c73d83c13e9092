//! Static SVG of the sensitivity curve: TRACE across, TRACE(0) up.

use std::fmt::Write;

use trace_core::bounds::Interval;
use trace_core::sensitivity::CurveRow;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 770.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 540.0;

/// Everything drawn on the chart. Marker positions come from the caller.
#[derive(Debug, Clone)]
pub struct ChartData<'a> {
    pub rows: &'a [CurveRow],
    /// Shaded band of TRACE values, if any.
    pub combined: Option<&'a Interval>,
    /// Trimming-bound endpoints as `(TRACE, TRACE(0))` pairs.
    pub trim_markers: [(f64, f64); 2],
}

struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let (lo, hi) = if hi > lo {
            (lo, hi)
        } else {
            (lo - 1.0, hi + 1.0)
        };
        Axis {
            lo,
            hi,
            px_lo,
            px_hi,
        }
    }

    fn px(&self, v: f64) -> f64 {
        let v = v.clamp(self.lo, self.hi);
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn finite_extent(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values
        .filter(|v| v.is_finite())
        .fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

pub fn render(data: &ChartData) -> String {
    let rows = data.rows;
    let (x_lo, x_hi) = finite_extent(
        rows.iter()
            .flat_map(|r| [r.trace_hat, r.ci_lo, r.ci_hi])
            .chain(data.trim_markers.iter().map(|m| m.0)),
    )
    .unwrap_or((-1.0, 1.0));
    let pad = 0.05 * (x_hi - x_lo);
    let x = Axis::new(x_lo - pad, x_hi + pad, LEFT, RIGHT);
    let (y_lo, y_hi) = finite_extent(rows.iter().map(|r| r.trace0)).unwrap_or((-1.0, 1.0));
    let y = Axis::new(y_lo, y_hi, BOTTOM, TOP);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, "<title>Implied TRACE across postulated TRACE(0)</title>");

    if let Some(c) = data.combined {
        let (a, b) = (x.px(c.lo), x.px(c.hi));
        let _ = writeln!(
            s,
            r##"<rect class="combined-region" x="{a:.2}" y="{TOP:.2}" width="{:.2}" height="{:.2}" fill="#9ecae1" fill-opacity="0.45"/>"##,
            (b - a).max(1.0),
            BOTTOM - TOP
        );
    }

    let _ = writeln!(s, r##"<g class="axes" stroke="#000000" stroke-width="1">"##);
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{BOTTOM}" x2="{RIGHT}" y2="{BOTTOM}"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{BOTTOM}" x2="{LEFT}" y2="{TOP}"/>"#
    );
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g class="ticks">"#);
    for (v, anchor) in [(x.lo, "start"), (x.hi, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}">{}</text>"#,
            x.px(v),
            BOTTOM + 18.0,
            tick(v)
        );
    }
    for v in [y_lo, y_hi] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y.px(v) + 4.0,
            tick(v)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text class="x-label" x="{:.2}" y="{:.2}" text-anchor="middle">TRACE</text>"#,
        (LEFT + RIGHT) / 2.0,
        HEIGHT - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text class="y-label" x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">TRACE(0)</text>"#,
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0
    );

    let mut whiskers = String::new();
    let mut curve = String::new();
    for (i, r) in rows.iter().enumerate() {
        let py = y.px(r.trace0);
        let _ = write!(
            whiskers,
            "M{:.2} {py:.2}H{:.2}",
            x.px(r.ci_lo),
            x.px(r.ci_hi)
        );
        let _ = write!(
            curve,
            "{}{:.2} {py:.2}",
            if i == 0 { "M" } else { "L" },
            x.px(r.trace_hat)
        );
    }
    let _ = writeln!(
        s,
        r##"<path class="ci-whiskers" d="{whiskers}" stroke="#969696" stroke-width="1.5" fill="none"/>"##
    );
    let _ = writeln!(
        s,
        r##"<path class="curve" d="{curve}" stroke="#08519c" stroke-width="2" fill="none"/>"##
    );

    for (tx, t0) in data.trim_markers {
        let _ = writeln!(
            s,
            r##"<circle class="trim-endpoint" cx="{:.2}" cy="{:.2}" r="5" fill="#d94801"/>"##,
            x.px(tx),
            y.px(t0)
        );
    }
    s.push_str("</svg>\n");
    s
}
