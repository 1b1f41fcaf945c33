//! The `ethconc` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::ingestion::{self, corpus, FetchConfig, FetchMode, HttpConfig, Outcome, SnapshotStore};
use crate::metric::{MetricId, MetricRegistry};
use crate::report::{self, Artifact, Format};
use crate::snapshot::{DateRange, SnapshotLookup};
use crate::synth::{synth, SynthKind};
use crate::timeseries::{self, IndexFamily, MasterConfig};

#[derive(Debug, Parser)]
#[command(name = "ethconc", version, about = "Concentration-of-control analytics for Ethereum")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Snapshot store directory.
    #[arg(long, global = true, default_value = "store")]
    pub store: PathBuf,
    /// Fixture directory laid out as <source-id>/<YYYY-MM-DD>.json.
    #[arg(long, global = true)]
    pub fixtures: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Fixture)]
    pub mode: ModeArg,
    #[arg(long, global = true)]
    pub date: Option<NaiveDate>,
    /// Inclusive range, START..END.
    #[arg(long, global = true)]
    pub range: Option<DateRange>,
    /// Restrict to these metrics (comma separated or repeated).
    #[arg(long, global = true, value_delimiter = ',')]
    pub metric: Vec<MetricId>,
    /// Leave these metrics out of master indices.
    #[arg(long, global = true, value_delimiter = ',')]
    pub exclude: Vec<MetricId>,
    /// JSON file mapping metric ids to weights.
    #[arg(long, global = true)]
    pub weights: Option<PathBuf>,
    /// Base Atkinson aversion.
    #[arg(long, global = true, default_value_t = timeseries::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, global = true, default_value = "out")]
    pub output_dir: PathBuf,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Fixture,
    Live,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Svg,
    Terminal,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Svg => Format::Svg,
            FormatArg::Terminal => Format::Terminal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Gini,
    Hhi,
    Shannon,
    Atkinson,
    All,
}

impl FamilyArg {
    fn families(self) -> Vec<IndexFamily> {
        match self {
            FamilyArg::Gini => vec![IndexFamily::Gini],
            FamilyArg::Hhi => vec![IndexFamily::HhiRescaled],
            FamilyArg::Shannon => vec![IndexFamily::ShannonNormalized],
            FamilyArg::Atkinson => vec![IndexFamily::Atkinson],
            FamilyArg::All => IndexFamily::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fetch, parse and store snapshots for --date or every day of --range.
    Ingest {
        /// Replace snapshots that are already stored.
        #[arg(long)]
        overwrite: bool,
        /// Also ingest the two scalar metrics.
        #[arg(long)]
        include_scalars: bool,
    },
    /// Index values per metric for one day.
    Indices,
    /// JSD over 1, 30, 60 and 90 day intervals ending at --date.
    Jsd,
    /// Master index series.
    Master {
        #[arg(long, value_enum, default_value_t = FamilyArg::All)]
        family: FamilyArg,
    },
    /// Averages table, first-vs-last JSD table, master chart and per-metric
    /// index series.
    Report,
    /// Lorenz curve points for one metric and day.
    Lorenz,
    /// Write a synthetic fixture corpus, or one synthetic distribution with
    /// --kind.
    Synth {
        #[arg(long, default_value_t = corpus::DEFAULT_DAYS)]
        days: u32,
        #[arg(long, default_value_t = corpus::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value = corpus::DEFAULT_START)]
        start: NaiveDate,
        #[arg(long)]
        kind: Option<SynthKind>,
        /// Entity count for --kind.
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
}

/// Failure of a command: either usage (exit 2) or runtime (exit 1).
enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(Error::Io(e))
    }
}

type CmdResult<T = i32> = std::result::Result<T, Failure>;

/// Runs the CLI with process stdout/stderr and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().ansi().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}\n\nFor more information, try '--help'.");
            2
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let g = &cli.global;
    if !(g.epsilon.is_finite() && g.epsilon > 0.0) {
        return Err(usage(format!("--epsilon must be > 0, got {}", g.epsilon)));
    }
    if g.date.is_some() && g.range.is_some() {
        return Err(usage("--date and --range are mutually exclusive"));
    }
    match &cli.command {
        Command::Ingest {
            overwrite,
            include_scalars,
        } => ingest(g, *overwrite, *include_scalars, out, err),
        Command::Indices => indices(g, out),
        Command::Jsd => jsd(g, out),
        Command::Master { family } => master(g, &family.families(), out),
        Command::Report => report_cmd(g, out),
        Command::Lorenz => lorenz(g, out),
        Command::Synth {
            days,
            seed,
            start,
            kind,
            n,
        } => synth_cmd(g, *days, *seed, *start, *kind, *n, out),
    }
}

/// Weight overrides from the `--weights` file.
pub fn load_registry(path: Option<&Path>) -> Result<MetricRegistry> {
    let registry = MetricRegistry::default();
    let Some(path) = path else { return Ok(registry) };
    let text = fs::read_to_string(path)?;
    let map: BTreeMap<String, f64> = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidArgument(format!("weights file {}: {e}", path.display())))?;
    registry.with_overrides(map.iter().map(|(k, v)| (k.as_str(), *v)))
}

fn open_store(g: &GlobalArgs) -> CmdResult<SnapshotStore> {
    Ok(SnapshotStore::open(&g.store)?)
}

fn selected_metrics(g: &GlobalArgs) -> Vec<MetricId> {
    if g.metric.is_empty() {
        MetricId::distributions().collect()
    } else {
        let mut m = g.metric.clone();
        m.sort();
        m.dedup();
        m
    }
}

/// --range, else --date as a single day, else the latest contiguous run.
fn resolve_range(g: &GlobalArgs, store: &impl SnapshotLookup) -> CmdResult<DateRange> {
    if let Some(r) = g.range {
        return Ok(r);
    }
    if let Some(d) = g.date {
        return Ok(DateRange::single(d));
    }
    store
        .latest_contiguous_range()
        .ok_or_else(|| Failure::Runtime(Error::InsufficientData(format!("store {} is empty", g.store.display()))))
}

/// --date, else the end of --range, else the latest stored day.
fn resolve_date(g: &GlobalArgs, store: &impl SnapshotLookup) -> CmdResult<NaiveDate> {
    if let Some(d) = g.date {
        return Ok(d);
    }
    if let Some(r) = g.range {
        return Ok(r.end);
    }
    store
        .all_dates()
        .last()
        .copied()
        .ok_or_else(|| Failure::Runtime(Error::InsufficientData(format!("store {} is empty", g.store.display()))))
}

/// Writes a rendered artifact: terminal output goes to `out`, files go to
/// the output directory.
fn write_artifact(g: &GlobalArgs, artifact: Artifact<'_>, format: Format, stem: &str, out: &mut dyn Write) -> CmdResult<()> {
    let text = report::render(artifact, format)?;
    if format == Format::Terminal {
        out.write_all(text.as_bytes())?;
        return Ok(());
    }
    let path = g.output_dir.join(format!("{stem}.{}", format.extension()));
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(&path, text)?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(())
}

fn formats(g: &GlobalArgs, default: &[Format]) -> Vec<Format> {
    match g.format {
        Some(f) => vec![f.into()],
        None => default.to_vec(),
    }
}

fn ingest(g: &GlobalArgs, overwrite: bool, include_scalars: bool, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let config = match g.mode {
        ModeArg::Fixture => {
            let dir = g
                .fixtures
                .clone()
                .ok_or_else(|| usage("fixture mode needs --fixtures <DIR>"))?;
            FetchConfig::fixtures(dir)
        }
        ModeArg::Live => {
            let mut c = FetchConfig::live(HttpConfig::from_env());
            c.fixture_dir = g.fixtures.clone();
            c
        }
    };
    let range = match (g.range, g.date) {
        (Some(r), _) => r,
        (None, Some(d)) => DateRange::single(d),
        (None, None) if config.mode == FetchMode::Live => DateRange::single(Utc::now().date_naive()),
        (None, None) => return Err(usage("ingest in fixture mode needs --date or --range")),
    };
    let mut specs = ingestion::default_sources();
    if include_scalars {
        specs.extend(ingestion::scalar_sources());
    }
    if !g.metric.is_empty() {
        specs.retain(|s| g.metric.contains(&s.metric));
    }
    let mut store = SnapshotStore::open_writable(&g.store)?;
    let mut failed = 0;
    for date in range.days() {
        let report = ingestion::ingest_day(&specs, date, &config, &mut store, overwrite);
        writeln!(
            out,
            "{date}: {} stored, {} skipped, {} failed",
            report.stored(),
            report.skipped(),
            report.failed()
        )?;
        for o in &report.outcomes {
            if matches!(o.outcome, Outcome::Failed(_)) {
                writeln!(err, "warning: {date} {o}")?;
            }
        }
        failed += report.failed();
    }
    Ok(if failed > 0 { 1 } else { 0 })
}

fn indices(g: &GlobalArgs, out: &mut dyn Write) -> CmdResult {
    let store = open_store(g)?;
    let date = resolve_date(g, &store)?;
    let day = report::day_indices(&store, date, &selected_metrics(g), g.epsilon)?;
    if day.rows.is_empty() {
        return Err(Error::MissingData {
            date,
            metric: day.missing.first().copied().unwrap_or(MetricId::ConsensusNodesByClient),
        }
        .into());
    }
    for f in formats(g, &[Format::Terminal]) {
        write_artifact(g, Artifact::Indices(&day), f, &format!("indices-{date}"), out)?;
    }
    Ok(0)
}

fn jsd(g: &GlobalArgs, out: &mut dyn Write) -> CmdResult {
    let store = open_store(g)?;
    let date = resolve_date(g, &store)?;
    let rows = report::interval_rows(&store, &selected_metrics(g), date);
    for f in formats(g, &[Format::Terminal]) {
        write_artifact(g, Artifact::Intervals(&rows), f, &format!("jsd-intervals-{date}"), out)?;
    }
    Ok(0)
}

fn master_config(g: &GlobalArgs, family: IndexFamily) -> CmdResult<MasterConfig> {
    let registry = load_registry(g.weights.as_deref()).map_err(|e| usage(e.to_string()))?;
    let mut cfg = MasterConfig::new(family).excluding(g.exclude.iter().copied());
    cfg.registry = registry;
    cfg.epsilon = g.epsilon;
    Ok(cfg)
}

/// Master series for each family over the resolved range.
pub fn master_series_for(
    store: &impl SnapshotLookup,
    range: DateRange,
    families: &[IndexFamily],
    registry: &MetricRegistry,
    exclusions: &[MetricId],
    epsilon: f64,
) -> Result<Vec<timeseries::MasterSeries>> {
    families
        .iter()
        .map(|&f| {
            let mut cfg = MasterConfig::new(f).excluding(exclusions.iter().copied());
            cfg.registry = registry.clone();
            cfg.epsilon = epsilon;
            timeseries::master_series(store, &cfg, range)
        })
        .collect()
}

fn master(g: &GlobalArgs, families: &[IndexFamily], out: &mut dyn Write) -> CmdResult {
    let store = open_store(g)?;
    let range = resolve_range(g, &store)?;
    let registry = master_config(g, IndexFamily::Gini)?.registry;
    let series = master_series_for(&store, range, families, &registry, &g.exclude, g.epsilon)?;
    let stem = format!("master-{}_{}", range.start, range.end);
    for f in formats(g, &[Format::Csv]) {
        write_artifact(g, Artifact::Master(&series), f, &stem, out)?;
    }
    let flagged = series[0].days.iter().filter(|d| d.flagged()).count();
    if flagged > 0 {
        writeln!(out, "{flagged} day(s) flagged for missing metrics")?;
    }
    Ok(0)
}

fn report_cmd(g: &GlobalArgs, out: &mut dyn Write) -> CmdResult {
    let store = open_store(g)?;
    let range = resolve_range(g, &store)?;
    let fmts = formats(g, &[Format::Csv, Format::Svg]);

    let table = report::averages_table(&store, range, g.epsilon)?;
    for &f in &fmts {
        write_artifact(g, Artifact::Averages(&table), f, "averages", out)?;
    }

    match report::jsd_table_between(&store, range.start, range.end) {
        Ok(t) => {
            for &f in &fmts {
                write_artifact(g, Artifact::Jsd(&t), f, "jsd-table", out)?;
            }
        }
        Err(e) => writeln!(out, "skipping JSD table: {e}")?,
    }

    let registry = master_config(g, IndexFamily::Gini)?.registry;
    let series = master_series_for(&store, range, &IndexFamily::ALL, &registry, &g.exclude, g.epsilon)?;
    for &f in &fmts {
        write_artifact(g, Artifact::Master(&series), f, "master", out)?;
    }

    if fmts != [Format::Terminal] {
        for metric in selected_metrics(g) {
            let s = report::index_series(&store, metric, range, g.epsilon)?;
            if s.points.iter().all(|p| p.indices.is_none()) {
                continue;
            }
            for &f in fmts.iter().filter(|&&f| f != Format::Terminal) {
                write_artifact(g, Artifact::Series(&s), f, &format!("series/{}", metric.as_str()), out)?;
            }
        }
    }
    Ok(0)
}

fn lorenz(g: &GlobalArgs, out: &mut dyn Write) -> CmdResult {
    let store = open_store(g)?;
    let date = resolve_date(g, &store)?;
    let metrics = if g.metric.is_empty() {
        vec![MetricId::BlocksByBuilder]
    } else {
        selected_metrics(g)
    };
    for metric in metrics {
        let curve = report::lorenz_curve(&store, metric, date)?;
        for f in formats(g, &[Format::Csv]) {
            write_artifact(g, Artifact::Lorenz(&curve), f, &format!("lorenz-{}-{date}", metric.as_str()), out)?;
        }
    }
    Ok(0)
}

fn synth_cmd(
    g: &GlobalArgs,
    days: u32,
    seed: u64,
    start: NaiveDate,
    kind: Option<SynthKind>,
    n: usize,
    out: &mut dyn Write,
) -> CmdResult {
    if let Some(kind) = kind {
        let d = synth(kind, n, seed)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Failure::Runtime(Error::Io(e.into()));
        w.write_record(["label", "quantity"]).map_err(io)?;
        for e in d.entries() {
            w.write_record([e.label.clone(), e.quantity.to_string()]).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::Runtime(Error::Io(e.into_error())))?;
        fs::create_dir_all(&g.output_dir)?;
        let path = g.output_dir.join(format!("synth-{}-{n}-{seed}.csv", kind.as_str()));
        fs::write(&path, bytes)?;
        writeln!(out, "wrote {}", path.display())?;
        return Ok(0);
    }
    let paths = corpus::write_corpus(&g.output_dir, start, days, seed)?;
    writeln!(out, "wrote {} fixture files under {}", paths.len(), g.output_dir.display())?;
    Ok(0)
}
