use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::svg::{self, Cell, LineChart, Series, Table, XAxis};
use super::{
    atkinson_footnote, cell_band, AveragesTable, DayIndices, IndexSeries, IntervalRow, JsdTable, LorenzCurve,
};
use crate::error::{Error, Result};
use crate::indices::hhi_classify;
use crate::timeseries::{IndexFamily, MasterSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Svg,
    Terminal,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Svg => "svg",
            Format::Terminal => "txt",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            "terminal" | "term" | "text" => Ok(Format::Terminal),
            _ => Err(Error::InvalidArgument(format!("unknown format `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Artifact<'a> {
    Averages(&'a AveragesTable),
    Jsd(&'a JsdTable),
    Intervals(&'a [IntervalRow]),
    Indices(&'a DayIndices),
    Series(&'a IndexSeries),
    Lorenz(&'a LorenzCurve),
    /// One series per index family, drawn on one chart.
    Master(&'a [MasterSeries]),
}

/// Renders an artifact to text.
pub fn render(artifact: Artifact<'_>, format: Format) -> Result<String> {
    Ok(match format {
        Format::Csv => csv_text(artifact)?,
        Format::Svg => svg_text(artifact),
        Format::Terminal => terminal_text(artifact),
    })
}

/// Renders and writes an artifact to `path`.
pub fn emit(artifact: Artifact<'_>, format: Format, path: &Path) -> Result<()> {
    let text = render(artifact, format)?;
    fs::write(path, text)?;
    Ok(())
}

fn num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fixed(v: Option<f64>, places: usize) -> String {
    v.map_or_else(|| "-".to_owned(), |x| format!("{x:.places$}"))
}

fn csv_text(artifact: Artifact<'_>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.into());
    match artifact {
        Artifact::Averages(t) => {
            w.write_record(["metric", "gini", "hhi_rescaled", "shannon_normalized", "atkinson", "coverage_days"])
                .map_err(io)?;
            for r in &t.rows {
                w.write_record([
                    r.metric.as_str().to_owned(),
                    num(r.gini),
                    num(r.hhi),
                    num(r.shannon),
                    num(r.atkinson),
                    r.coverage_days.to_string(),
                ])
                .map_err(io)?;
            }
        }
        Artifact::Jsd(t) => {
            w.write_record(["metric", "first", "last", "jsd"]).map_err(io)?;
            for r in &t.rows {
                w.write_record([r.metric.as_str().to_owned(), t.first.to_string(), t.last.to_string(), r.formatted()])
                    .map_err(io)?;
            }
        }
        Artifact::Intervals(rows) => {
            w.write_record(["metric", "end", "jsd_1d", "jsd_30d", "jsd_60d", "jsd_90d"]).map_err(io)?;
            for r in rows {
                let i = &r.intervals;
                w.write_record([
                    r.metric.as_str().to_owned(),
                    i.end.to_string(),
                    num(i.one_day),
                    num(i.thirty_day),
                    num(i.sixty_day),
                    num(i.ninety_day),
                ])
                .map_err(io)?;
            }
        }
        Artifact::Indices(d) => {
            w.write_record([
                "date",
                "metric",
                "gini",
                "hhi_rescaled",
                "shannon_normalized",
                "atkinson",
                "epsilon",
                "hhi_class",
            ])
            .map_err(io)?;
            for (metric, ix) in &d.rows {
                let class = hhi_classify(ix.hhi).map(|c| c.as_str()).unwrap_or("");
                w.write_record([
                    d.date.to_string(),
                    metric.as_str().to_owned(),
                    ix.gini.to_string(),
                    ix.hhi.to_string(),
                    num(ix.shannon),
                    num(ix.atkinson.map(|a| a.value)),
                    ix.epsilon.to_string(),
                    class.to_owned(),
                ])
                .map_err(io)?;
            }
        }
        Artifact::Series(s) => {
            w.write_record(["date", "gini", "hhi_rescaled", "shannon_normalized", "atkinson", "epsilon"])
                .map_err(io)?;
            for p in &s.points {
                let cells = match &p.indices {
                    Some(ix) => [
                        ix.gini.to_string(),
                        ix.hhi.to_string(),
                        num(ix.shannon),
                        num(ix.atkinson.map(|a| a.value)),
                        ix.epsilon.to_string(),
                    ],
                    None => Default::default(),
                };
                let mut rec = vec![p.date.to_string()];
                rec.extend(cells);
                w.write_record(rec).map_err(io)?;
            }
        }
        Artifact::Lorenz(c) => {
            w.write_record(["population", "resource"]).map_err(io)?;
            for p in &c.points {
                w.write_record([p.population.to_string(), p.resource.to_string()]).map_err(io)?;
            }
        }
        Artifact::Master(series) => {
            w.write_record(["date", "family", "value", "geomean", "min", "max", "n", "missing", "note"])
                .map_err(io)?;
            for s in series {
                for d in &s.days {
                    let missing: Vec<_> = d.missing.iter().map(|m| m.as_str()).collect();
                    w.write_record([
                        d.date.to_string(),
                        s.family.as_str().to_owned(),
                        num(d.index.map(|i| i.value)),
                        num(d.index.map(|i| i.geomean)),
                        num(d.index.map(|i| i.min)),
                        num(d.index.map(|i| i.max)),
                        d.index.map(|i| i.n.to_string()).unwrap_or_default(),
                        missing.join(";"),
                        d.note.clone().unwrap_or_default(),
                    ])
                    .map_err(io)?;
                }
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn svg_text(artifact: Artifact<'_>) -> String {
    match artifact {
        Artifact::Averages(t) => {
            let rows = t
                .rows
                .iter()
                .map(|r| {
                    let mut cells = vec![Cell { text: r.metric.as_str().to_owned(), band: None }];
                    cells.extend(IndexFamily::ALL.map(|f| Cell {
                        text: fixed(r.value(f), 4),
                        band: r.band(f),
                    }));
                    cells.push(Cell { text: r.coverage_days.to_string(), band: None });
                    cells
                })
                .collect();
            svg::table(&Table {
                title: format!("Index averages {}", t.range),
                header: averages_header(),
                rows,
                footnote: Some(atkinson_footnote(t.epsilon)),
            })
        }
        Artifact::Jsd(t) => svg::table(&Table {
            title: format!("JSD {} vs {}", t.first, t.last),
            header: vec!["metric".into(), "JSD".into()],
            rows: t
                .rows
                .iter()
                .map(|r| vec![Cell { text: r.metric.as_str().to_owned(), band: None }, Cell { text: r.formatted(), band: None }])
                .collect(),
            footnote: None,
        }),
        Artifact::Intervals(rows) => svg::table(&Table {
            title: rows.first().map_or("JSD intervals".to_owned(), |r| format!("JSD intervals ending {}", r.intervals.end)),
            header: ["metric", "1d", "30d", "60d", "90d"].map(String::from).to_vec(),
            rows: rows
                .iter()
                .map(|r| {
                    let mut cells = vec![Cell { text: r.metric.as_str().to_owned(), band: None }];
                    cells.extend(r.intervals.values().map(|(_, v)| Cell { text: fixed(v, 7), band: None }));
                    cells
                })
                .collect(),
            footnote: None,
        }),
        Artifact::Indices(d) => svg::table(&Table {
            title: format!("Indices {}", d.date),
            header: ["metric", "Gini", "HHI", "Shannon", "Atkinson"].map(String::from).to_vec(),
            rows: d
                .rows
                .iter()
                .map(|(m, ix)| {
                    let mut cells = vec![Cell { text: m.as_str().to_owned(), band: None }];
                    cells.extend(IndexFamily::ALL.map(|f| Cell {
                        text: fixed(ix.value(f), 4),
                        band: ix.value(f).map(|v| cell_band(f, v)),
                    }));
                    cells
                })
                .collect(),
            footnote: Some(atkinson_footnote(d.epsilon)),
        }),
        Artifact::Series(s) => svg::line_chart(&LineChart {
            title: format!("{} {}", s.metric.title(), s.range),
            x_label: "date".into(),
            y_label: "index value".into(),
            x: XAxis::Dates(s.points.iter().map(|p| p.date).collect()),
            series: IndexFamily::ALL
                .iter()
                .map(|&f| Series {
                    name: f.title().into(),
                    values: s.points.iter().map(|p| p.indices.and_then(|ix| ix.value(f))).collect(),
                    step: false,
                })
                .collect(),
            y_range: Some((0.0, 1.0)),
            footnote: Some(atkinson_footnote(
                s.points.iter().find_map(|p| p.indices).map_or(0.5, |ix| ix.epsilon),
            )),
        }),
        Artifact::Lorenz(c) => svg::line_chart(&LineChart {
            title: format!("Lorenz curve, {} {}", c.metric.as_str(), c.date),
            x_label: "cumulative share of entities".into(),
            y_label: "cumulative share of resource".into(),
            x: XAxis::Numeric(c.points.iter().map(|p| p.population).collect()),
            series: vec![
                Series {
                    name: "Lorenz".into(),
                    values: c.points.iter().map(|p| Some(p.resource)).collect(),
                    step: false,
                },
                Series {
                    name: "equality".into(),
                    values: c.points.iter().map(|p| Some(p.population)).collect(),
                    step: false,
                },
            ],
            y_range: Some((0.0, 1.0)),
            footnote: None,
        }),
        Artifact::Master(series) => {
            let dates = series.first().map(|s| s.days.iter().map(|d| d.date).collect()).unwrap_or_default();
            let range = series
                .first()
                .map(|s| format!("{}..{}", s.range.0, s.range.1))
                .unwrap_or_default();
            svg::line_chart(&LineChart {
                title: format!("Master index {range}"),
                x_label: "date".into(),
                y_label: "master index".into(),
                x: XAxis::Dates(dates),
                series: series
                    .iter()
                    .map(|s| Series {
                        name: s.family.title().into(),
                        values: s.days.iter().map(|d| d.value()).collect(),
                        step: true,
                    })
                    .collect(),
                y_range: None,
                footnote: series
                    .iter()
                    .any(|s| s.family == IndexFamily::Atkinson)
                    .then(|| atkinson_footnote(crate::timeseries::DEFAULT_EPSILON)),
            })
        }
    }
}

fn averages_header() -> Vec<String> {
    ["metric", "Gini", "HHI", "Shannon", "Atkinson", "days"].map(String::from).to_vec()
}

/// 256-color foregrounds, green to red.
const ANSI_BANDS: [u8; 5] = [34, 112, 220, 208, 196];

fn heat(text: &str, band: Option<u8>) -> String {
    match band {
        Some(b) => format!("\x1b[38;5;{}m{text}\x1b[0m", ANSI_BANDS[usize::from(b.min(4))]),
        None => text.to_owned(),
    }
}

fn terminal_text(artifact: Artifact<'_>) -> String {
    let mut out = String::new();
    match artifact {
        Artifact::Averages(t) => {
            let _ = writeln!(out, "Index averages {}", t.range);
            let h = averages_header();
            let _ = writeln!(out, "{:<28} {:>8} {:>8} {:>8} {:>8} {:>5}", h[0], h[1], h[2], h[3], h[4], h[5]);
            for r in &t.rows {
                let _ = write!(out, "{:<28}", r.metric.as_str());
                for f in IndexFamily::ALL {
                    let _ = write!(out, " {}", heat(&format!("{:>8}", fixed(r.value(f), 4)), r.band(f)));
                }
                let _ = writeln!(out, " {:>5}", r.coverage_days);
            }
            let _ = writeln!(out, "* {}", atkinson_footnote(t.epsilon));
        }
        Artifact::Jsd(t) => {
            let _ = writeln!(out, "JSD {} vs {}", t.first, t.last);
            for r in &t.rows {
                let _ = writeln!(out, "{:<28} {:>10}", r.metric.as_str(), r.formatted());
            }
        }
        Artifact::Intervals(rows) => {
            let _ = writeln!(out, "{:<28} {:>10} {:>10} {:>10} {:>10}", "metric", "1d", "30d", "60d", "90d");
            for r in rows {
                let _ = write!(out, "{:<28}", r.metric.as_str());
                for (_, v) in r.intervals.values() {
                    let _ = write!(out, " {:>10}", fixed(v, 7));
                }
                out.push('\n');
            }
        }
        Artifact::Indices(d) => {
            let _ = writeln!(out, "Indices {}", d.date);
            let _ = writeln!(
                out,
                "{:<28} {:>8} {:>8} {:>8} {:>8}  {}",
                "metric", "Gini", "HHI", "Shannon", "Atkinson", "HHI class"
            );
            for (m, ix) in &d.rows {
                let _ = write!(out, "{:<28}", m.as_str());
                for f in IndexFamily::ALL {
                    let v = ix.value(f);
                    let _ = write!(out, " {}", heat(&format!("{:>8}", fixed(v, 4)), v.map(|v| cell_band(f, v))));
                }
                let class = hhi_classify(ix.hhi).map(|c| c.as_str()).unwrap_or("-");
                let _ = writeln!(out, "  {class}");
            }
            for m in &d.missing {
                let _ = writeln!(out, "{:<28} no snapshot", m.as_str());
            }
            let _ = writeln!(out, "* {}", atkinson_footnote(d.epsilon));
        }
        Artifact::Series(s) => {
            let _ = writeln!(out, "{} {}", s.metric.title(), s.range);
            let _ = writeln!(out, "{:<10} {:>8} {:>8} {:>8} {:>8}", "date", "Gini", "HHI", "Shannon", "Atkinson");
            for p in &s.points {
                let _ = write!(out, "{:<10}", p.date.to_string());
                for f in IndexFamily::ALL {
                    let _ = write!(out, " {:>8}", fixed(p.indices.and_then(|ix| ix.value(f)), 4));
                }
                out.push('\n');
            }
        }
        Artifact::Lorenz(c) => {
            let _ = writeln!(out, "Lorenz curve, {} {}", c.metric.as_str(), c.date);
            for p in &c.points {
                let _ = writeln!(out, "{:>8.4} {:>8.4}", p.population, p.resource);
            }
        }
        Artifact::Master(series) => {
            let _ = write!(out, "{:<10}", "date");
            for s in series.iter() {
                let _ = write!(out, " {:>10}", s.family.as_str());
            }
            out.push('\n');
            let n = series.first().map_or(0, |s| s.days.len());
            for i in 0..n {
                let _ = write!(out, "{:<10}", series[0].days[i].date.to_string());
                let mut flagged = false;
                for s in series.iter() {
                    let d = &s.days[i];
                    flagged |= d.flagged();
                    let _ = write!(out, " {:>10}", fixed(d.value(), 4));
                }
                if flagged {
                    out.push_str("  (flagged)");
                }
                out.push('\n');
            }
        }
    }
    out
}
