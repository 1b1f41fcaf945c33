//! Minimal, deterministic SVG writer for line charts and heat tables.
//!
//! Coordinates are printed with two decimals so identical inputs give
//! identical bytes.

use std::fmt::Write;

use chrono::NaiveDate;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 70.0;

/// Colors for up to eight series; later series wrap around.
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// Heat band fills, green to red.
pub const HEAT_FILLS: [&str; 5] = ["#1a9850", "#91cf60", "#fee08b", "#fc8d59", "#d73027"];

#[derive(Debug, Clone, PartialEq)]
pub enum XAxis {
    Dates(Vec<NaiveDate>),
    Numeric(Vec<f64>),
}

impl XAxis {
    fn len(&self) -> usize {
        match self {
            XAxis::Dates(d) => d.len(),
            XAxis::Numeric(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    /// One value per x position; `None` leaves a gap.
    pub values: Vec<Option<f64>>,
    /// Draw as a step line.
    pub step: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x: XAxis,
    pub series: Vec<Series>,
    /// Fixed y range; derived from the data when absent.
    pub y_range: Option<(f64, f64)>,
    pub footnote: Option<String>,
}

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

fn header(out: &mut String, w: f64, h: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{w:.0}" height="{h:.0}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        w / 2.0,
        escape(title)
    );
}

/// Round tick step covering `span` in about five intervals.
fn tick_step(span: f64) -> f64 {
    let raw = span / 5.0;
    if !(raw.is_finite() && raw > 0.0) {
        return 1.0;
    }
    let exp = raw.log10().floor() as i32;
    let base = if exp >= 0 { 10f64.powi(exp) } else { 1.0 / 10f64.powi(-exp) };
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| base * m)
        .find(|&s| s >= raw * (1.0 - 1e-12))
        .unwrap_or(base * 10.0)
}

fn data_range(chart: &LineChart) -> (f64, f64) {
    if let Some(r) = chart.y_range {
        return r;
    }
    let vals = chart.series.iter().flat_map(|s| s.values.iter().flatten().copied());
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 1.0, hi + 1.0);
    }
    let step = tick_step(hi - lo);
    ((lo / step).floor() * step, (hi / step).ceil() * step)
}

pub fn line_chart(chart: &LineChart) -> String {
    let mut out = String::new();
    header(&mut out, WIDTH, HEIGHT, &chart.title);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let n = chart.x.len();
    let (y0, y1) = data_range(chart);
    let (x0, x1) = match &chart.x {
        XAxis::Dates(_) => (0.0, (n.max(2) - 1) as f64),
        XAxis::Numeric(v) => {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo.is_finite() && hi > lo { (lo, hi) } else { (0.0, 1.0) }
        }
    };
    let xpos = |i: usize| -> f64 {
        let x = match &chart.x {
            XAxis::Dates(_) => i as f64,
            XAxis::Numeric(v) => v[i],
        };
        LEFT + (x - x0) / (x1 - x0) * plot_w
    };
    let ypos = |v: f64| TOP + plot_h - (v - y0) / (y1 - y0) * plot_h;

    // axes
    let _ = writeln!(
        out,
        r##"<g stroke="#333" stroke-width="1"><line x1="{LEFT:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/><line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{:.2}"/></g>"##,
        TOP + plot_h,
        LEFT + plot_w,
        TOP + plot_h,
        TOP + plot_h
    );

    // y ticks
    let step = tick_step(y1 - y0);
    let mut k = (y0 / step).ceil() as i64;
    while (k as f64) * step <= y1 + step * 1e-9 {
        let v = k as f64 * step;
        let y = ypos(v);
        let label = if step >= 1.0 { format!("{v:.0}") } else { format!("{v:.2}") };
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="#333"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
        k += 1;
    }

    // x ticks
    match &chart.x {
        XAxis::Dates(dates) if !dates.is_empty() => {
            let every = (dates.len() / 6).max(1);
            let mut idx: Vec<usize> = (0..dates.len()).step_by(every).collect();
            if *idx.last().unwrap() != dates.len() - 1 {
                idx.push(dates.len() - 1);
            }
            for i in idx {
                let x = xpos(i);
                let _ = writeln!(
                    out,
                    r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                    TOP + plot_h,
                    TOP + plot_h + 5.0,
                    TOP + plot_h + 20.0,
                    dates[i]
                );
            }
        }
        XAxis::Dates(_) => {}
        XAxis::Numeric(_) => {
            let step = tick_step(x1 - x0);
            let mut k = (x0 / step).ceil() as i64;
            while (k as f64) * step <= x1 + step * 1e-9 {
                let v = k as f64 * step;
                let x = LEFT + (v - x0) / (x1 - x0) * plot_w;
                let _ = writeln!(
                    out,
                    r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{v:.2}</text>"##,
                    TOP + plot_h,
                    TOP + plot_h + 5.0,
                    TOP + plot_h + 20.0
                );
                k += 1;
            }
        }
    }

    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - BOTTOM + 42.0,
        escape(&chart.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&chart.y_label)
    );

    for (s_idx, s) in chart.series.iter().enumerate() {
        let color = PALETTE[s_idx % PALETTE.len()];
        let mut pts = String::new();
        let mut prev_y: Option<f64> = None;
        for (i, v) in s.values.iter().enumerate().take(n) {
            let Some(v) = v else { continue };
            let (x, y) = (xpos(i), ypos(*v));
            if s.step {
                if let Some(py) = prev_y {
                    let _ = write!(pts, "{x:.2},{py:.2} ");
                }
            }
            let _ = write!(pts, "{x:.2},{y:.2} ");
            prev_y = Some(y);
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
            pts.trim_end(),
            escape(&s.name)
        );
        let ly = TOP + 10.0 + 18.0 * s_idx as f64;
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="3"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&s.name)
        );
    }

    if let Some(note) = &chart.footnote {
        let _ = writeln!(
            out,
            r#"<text x="{LEFT:.2}" y="{:.2}" font-size="10">{}</text>"#,
            HEIGHT - 8.0,
            escape(note)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One table cell: text plus an optional heat band for its fill.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub text: String,
    pub band: Option<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub footnote: Option<String>,
}

pub fn table(t: &Table) -> String {
    let first_w = 220.0;
    let col_w = 130.0;
    let row_h = 24.0;
    let cols = t.header.len();
    let w = 40.0 + first_w + col_w * cols.saturating_sub(1) as f64;
    let h = 70.0 + row_h * (t.rows.len() + 1) as f64 + 30.0;
    let mut out = String::new();
    header(&mut out, w, h, &t.title);
    let col_x = |c: usize| if c == 0 { 20.0 } else { 20.0 + first_w + col_w * (c - 1) as f64 };
    let col_width = |c: usize| if c == 0 { first_w } else { col_w };

    let y = 50.0;
    for (c, name) in t.header.iter().enumerate() {
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{y:.2}" width="{:.2}" height="{row_h:.2}" fill="#eeeeee" stroke="#999"/><text x="{:.2}" y="{:.2}" font-weight="bold">{}</text>"##,
            col_x(c),
            col_width(c),
            col_x(c) + 6.0,
            y + 16.0,
            escape(name)
        );
    }
    for (r, row) in t.rows.iter().enumerate() {
        let y = 50.0 + row_h * (r + 1) as f64;
        for (c, cell) in row.iter().enumerate().take(cols) {
            let fill = cell.band.map_or("white", |b| HEAT_FILLS[usize::from(b.min(4))]);
            let _ = writeln!(
                out,
                r##"<rect x="{:.2}" y="{y:.2}" width="{:.2}" height="{row_h:.2}" fill="{fill}" stroke="#999"/><text x="{:.2}" y="{:.2}">{}</text>"##,
                col_x(c),
                col_width(c),
                col_x(c) + 6.0,
                y + 16.0,
                escape(&cell.text)
            );
        }
    }
    if let Some(note) = &t.footnote {
        let _ = writeln!(out, r#"<text x="20" y="{:.2}" font-size="10">{}</text>"#, h - 14.0, escape(note));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(gap: bool) -> LineChart {
        LineChart {
            title: "t<1>".into(),
            x_label: "date".into(),
            y_label: "v".into(),
            x: XAxis::Dates((0..4).map(|i| NaiveDate::from_ymd_opt(2023, 5, 23 + i).unwrap()).collect()),
            series: vec![
                Series { name: "a".into(), values: vec![Some(0.1), if gap { None } else { Some(0.2) }, Some(0.3), Some(0.4)], step: false },
                Series { name: "b".into(), values: vec![Some(0.5); 4], step: true },
            ],
            y_range: None,
            footnote: Some("note".into()),
        }
    }

    #[test]
    fn one_polyline_per_series() {
        let svg = line_chart(&chart(true));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("t&lt;1&gt;"));
        assert!(svg.contains("2023-05-23"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg, line_chart(&chart(true)));
    }

    #[test]
    fn tick_steps_are_round() {
        assert_eq!(tick_step(1.0), 0.2);
        assert_eq!(tick_step(1000.0), 200.0);
        assert_eq!(tick_step(7.0), 2.0);
    }
}
