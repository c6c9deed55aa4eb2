//! Static SVG line charts of learning curves with standard-error bands.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{PeerlabError, Result};
use crate::harness::metrics::{mean, sem};
use crate::harness::output::{read_csv, CurveRow};

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// One line: per step, mean across seeds and its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Solo,
    Train,
}

impl Metric {
    pub fn column(self) -> &'static str {
        match self {
            Metric::Solo => "solo_return",
            Metric::Train => "train_return",
        }
    }

    fn title(self) -> &'static str {
        match self {
            Metric::Solo => "Solo evaluation return",
            Metric::Train => "Training episode return",
        }
    }
}

/// Averages agents within a seed, then summarizes across seeds.
pub fn series_from_rows(rows: &[CurveRow], metric: Metric) -> Vec<Series> {
    // run_id -> step -> seed -> values
    let mut grouped: BTreeMap<&str, BTreeMap<usize, BTreeMap<u64, Vec<f64>>>> = BTreeMap::new();
    for r in rows {
        let v = match metric {
            Metric::Solo => Some(r.solo_return),
            Metric::Train => r.train_return,
        };
        if let Some(v) = v.filter(|v| v.is_finite()) {
            grouped
                .entry(&r.run_id)
                .or_default()
                .entry(r.step)
                .or_default()
                .entry(r.seed)
                .or_default()
                .push(v);
        }
    }
    grouped
        .into_iter()
        .map(|(label, steps)| Series {
            label: label.to_owned(),
            points: steps
                .into_iter()
                .map(|(step, seeds)| {
                    let per_seed: Vec<f64> = seeds.values().map(|v| mean(v)).collect();
                    (step as f64, mean(&per_seed), sem(&per_seed))
                })
                .collect(),
        })
        .filter(|s| !s.points.is_empty())
        .collect()
}

fn nice_ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / count as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 10_000.0 {
        format!("{}k", v / 1000.0)
    } else if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders the series as a self-contained SVG document.
pub fn render_svg(series: &[Series], title: &str, x_label: &str, y_label: &str) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y, e) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y - e);
        y1 = y1.max(y + e);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    y0 = y0.min(0.0);
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );
    for t in nice_ticks(x0, x1, 6) {
        let x = sx(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#e0e0e0"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
            TOP,
            TOP + ph,
            TOP + ph + 18.0,
            fmt_tick(t)
        );
    }
    for t in nice_ticks(y0, y1, 5) {
        let y = sy(t);
        let _ = writeln!(
            s,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#e0e0e0"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            LEFT,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 18.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );

    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut band = String::new();
        for &(x, y, e) in &ser.points {
            let _ = write!(band, "{:.2},{:.2} ", sx(x), sy(y + e));
        }
        for &(x, y, e) in ser.points.iter().rev() {
            let _ = write!(band, "{:.2},{:.2} ", sx(x), sy(y - e));
        }
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#,
            band.trim_end()
        );
        let mut d = String::new();
        for (i, &(x, y, _)) in ser.points.iter().enumerate() {
            let _ = write!(
                d,
                "{}{:.2},{:.2} ",
                if i == 0 { "M" } else { "L" },
                sx(x),
                sy(y)
            );
        }
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            d.trim_end()
        );
        let ly = TOP + 10.0 + 20.0 * k as f64;
        let lx = LEFT + pw + 14.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="3"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 22.0,
            lx + 28.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes one SVG per metric next to `out_dir`. Returns the paths written.
pub fn plot_curves(csv_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let rows: Vec<CurveRow> = read_csv(csv_path)?;
    if rows.is_empty() {
        return Err(PeerlabError::MalformedCsv {
            path: csv_path.to_owned(),
            reason: "no data rows".into(),
        });
    }
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for metric in [Metric::Solo, Metric::Train] {
        let series = series_from_rows(&rows, metric);
        if series.is_empty() {
            continue;
        }
        let path = out_dir.join(format!("{}.svg", metric.column()));
        std::fs::write(&path, render_svg(&series, metric.title(), "step", "return"))?;
        written.push(path);
    }
    Ok(written)
}
