//! Python bindings for `ethconc`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::NaiveDate;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyOSError, PyValueError};
use pyo3::prelude::*;

use ethconc::indices::{self, AtkinsonParams};
use ethconc::ingestion::{self, corpus, FetchConfig, SnapshotStore};
use ethconc::report;
use ethconc::synth::SynthKind;
use ethconc::timeseries::{self, IndexFamily, MasterComponent, MasterConfig, MasterIndexInput, ScalarEconomics};
use ethconc::{DateRange, Error, MetricId, MetricRegistry, SnapshotLookup};

create_exception!(pyethconc, EthconcError, PyException);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        Error::InvalidArgument(_) | Error::InvalidDistribution(_) => PyValueError::new_err(e.to_string()),
        other => EthconcError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

fn date(s: &str) -> PyResult<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| PyValueError::new_err(format!("bad date `{s}`: {e}")))
}

/// Labeled nonnegative quantities.
#[pyclass(name = "ShareDistribution", module = "pyethconc", frozen)]
struct PyDistribution {
    inner: ethconc::ShareDistribution,
}

#[pymethods]
impl PyDistribution {
    #[new]
    fn new(entries: Vec<(String, f64)>) -> PyResult<Self> {
        ethconc::ShareDistribution::new(entries)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn from_quantities(quantities: Vec<f64>) -> PyResult<Self> {
        ethconc::ShareDistribution::from_quantities(&quantities)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.entries().iter().map(|e| e.label.clone()).collect()
    }

    #[getter]
    fn quantities(&self) -> Vec<f64> {
        self.inner.quantities().collect()
    }

    #[getter]
    fn total(&self) -> f64 {
        self.inner.total()
    }

    fn proportions(&self) -> Vec<f64> {
        self.inner.proportions()
    }

    fn max_share(&self) -> f64 {
        self.inner.max_share()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("ShareDistribution(n={}, total={})", self.inner.len(), self.inner.total())
    }
}

#[pyfunction]
fn gini(d: &PyDistribution) -> f64 {
    indices::gini(&d.inner)
}

#[pyfunction]
fn gini_from_lorenz(d: &PyDistribution) -> f64 {
    indices::gini_from_lorenz(&d.inner)
}

#[pyfunction]
fn lorenz_points(d: &PyDistribution) -> Vec<(f64, f64)> {
    indices::lorenz_points(&d.inner)
        .into_iter()
        .map(|p| (p.population, p.resource))
        .collect()
}

#[pyfunction]
fn hhi(d: &PyDistribution) -> f64 {
    indices::hhi(&d.inner)
}

#[pyfunction]
fn hhi_classify(theta: f64) -> PyResult<&'static str> {
    indices::hhi_classify(theta).map(|c| c.as_str()).map_err(to_py)
}

#[pyfunction]
fn shannon(d: &PyDistribution) -> f64 {
    indices::shannon(&d.inner)
}

#[pyfunction]
fn shannon_normalized(d: &PyDistribution) -> PyResult<f64> {
    indices::shannon_normalized(&d.inner).map_err(to_py)
}

/// Returns `(value, zero_limit)`.
#[pyfunction]
fn atkinson(d: &PyDistribution, epsilon: f64) -> PyResult<(f64, bool)> {
    let a = indices::atkinson(&d.inner, AtkinsonParams::new(epsilon).map_err(to_py)?);
    Ok((a.value, a.zero_limit))
}

#[pyfunction]
fn adjusted_aversion(base: f64, omega: f64) -> PyResult<f64> {
    indices::adjusted_aversion(base, omega).map_err(to_py)
}

#[pyfunction]
fn percentile(values: Vec<f64>, p: f64) -> PyResult<f64> {
    indices::percentile(&values, p).map_err(to_py)
}

/// `{"palma": .., "p90_p10": .., "p50_p10": ..}`; undefined ratios are None.
#[pyfunction]
fn tail_ratios(d: &PyDistribution) -> BTreeMap<&'static str, Option<f64>> {
    let t = indices::tail_ratios(&d.inner);
    BTreeMap::from([("palma", t.palma), ("p90_p10", t.p90_p10), ("p50_p10", t.p50_p10)])
}

#[pyfunction]
fn kl_divergence(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    indices::kl_divergence(&p, &q).map_err(to_py)
}

#[pyfunction]
fn jsd_vectors(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    indices::jsd_vectors(&p, &q).map_err(to_py)
}

#[pyfunction]
fn jsd_normalized(p: &PyDistribution, q: &PyDistribution) -> f64 {
    indices::jsd_normalized(&p.inner, &q.inner)
}

#[pyfunction]
fn synth(kind: &str, n: usize, seed: u64) -> PyResult<PyDistribution> {
    let kind: SynthKind = parse(kind)?;
    ethconc::synth::synth(kind, n, seed)
        .map(|inner| PyDistribution { inner })
        .map_err(to_py)
}

/// Master index of one day from `{metric_id: value}` with default weights
/// normalized over the given metrics.
#[pyfunction]
#[pyo3(signature = (values, family = "gini", weights = None))]
fn master_index(values: BTreeMap<String, f64>, family: &str, weights: Option<BTreeMap<String, f64>>) -> PyResult<f64> {
    let family: IndexFamily = parse(family)?;
    let mut registry = MetricRegistry::default();
    if let Some(w) = weights {
        registry = registry
            .with_overrides(w.iter().map(|(k, v)| (k.as_str(), *v)))
            .map_err(to_py)?;
    }
    let pairs = values
        .iter()
        .map(|(k, v)| Ok((parse::<MetricId>(k)?, *v)))
        .collect::<PyResult<Vec<_>>>()?;
    let input = MasterIndexInput::from_values(NaiveDate::MIN, family, &pairs, &registry).map_err(to_py)?;
    timeseries::master_index(&input).map(|m| m.value).map_err(to_py)
}

/// Master index from explicit `(value, normalized_weight)` pairs.
#[pyfunction]
fn master_index_weighted(components: Vec<(f64, f64)>) -> PyResult<f64> {
    let metrics: Vec<MetricId> = MetricId::distributions().collect();
    if components.len() > metrics.len() {
        return Err(PyValueError::new_err("at most 12 components"));
    }
    let comps = components
        .iter()
        .zip(metrics)
        .map(|(&(value, weight), metric)| MasterComponent { metric, value, weight })
        .collect();
    let input = MasterIndexInput::new(NaiveDate::MIN, IndexFamily::Gini, comps).map_err(to_py)?;
    timeseries::master_index(&input).map(|m| m.value).map_err(to_py)
}

#[pyfunction]
fn effective_inflation(issuance: f64, burned: f64, total_supply: f64, period_days: u32) -> PyResult<f64> {
    let e = ScalarEconomics::new(issuance, burned, total_supply, 0.0).map_err(to_py)?;
    timeseries::effective_inflation(&e, period_days).map_err(to_py)
}

#[pyfunction]
fn staked_percentage(staked: f64, total_supply: f64) -> PyResult<f64> {
    let e = ScalarEconomics::new(0.0, 0.0, total_supply, staked).map_err(to_py)?;
    timeseries::staked_percentage(&e).map_err(to_py)
}

#[pyfunction]
fn metric_ids() -> Vec<&'static str> {
    MetricId::ALL.iter().map(|m| m.as_str()).collect()
}

/// Writes the synthetic fixture corpus; returns the number of files.
#[pyfunction]
#[pyo3(signature = (dir, start = corpus::DEFAULT_START, days = corpus::DEFAULT_DAYS, seed = corpus::DEFAULT_SEED))]
fn write_corpus(dir: PathBuf, start: &str, days: u32, seed: u64) -> PyResult<usize> {
    corpus::write_corpus(&dir, date(start)?, days, seed)
        .map(|p| p.len())
        .map_err(to_py)
}

/// Ingests fixtures for every day in `start..=end`; returns
/// `(stored, skipped, failed)`.
#[pyfunction]
#[pyo3(signature = (store, fixtures, start, end, overwrite = false))]
fn ingest_fixtures(store: PathBuf, fixtures: PathBuf, start: &str, end: &str, overwrite: bool) -> PyResult<(usize, usize, usize)> {
    let range = DateRange::new(date(start)?, date(end)?).map_err(to_py)?;
    let mut st = SnapshotStore::open_writable(store).map_err(to_py)?;
    let cfg = FetchConfig::fixtures(fixtures);
    let specs = ingestion::default_sources();
    let mut totals = (0, 0, 0);
    for day in range.days() {
        let r = ingestion::ingest_day(&specs, day, &cfg, &mut st, overwrite);
        totals.0 += r.stored();
        totals.1 += r.skipped();
        totals.2 += r.failed();
    }
    Ok(totals)
}

/// Read-only view of a snapshot store.
#[pyclass(name = "SnapshotStore", module = "pyethconc", frozen)]
struct PyStore {
    inner: SnapshotStore,
}

#[pymethods]
impl PyStore {
    #[new]
    fn open(path: PathBuf) -> PyResult<Self> {
        SnapshotStore::open(path).map(|inner| Self { inner }).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn dates(&self, metric: &str) -> PyResult<Vec<String>> {
        let m: MetricId = parse(metric)?;
        Ok(self.inner.dates(m).iter().map(ToString::to_string).collect())
    }

    fn distribution(&self, day: &str, metric: &str) -> PyResult<PyDistribution> {
        let snap = self.inner.read(date(day)?, parse(metric)?).map_err(to_py)?;
        snap.distribution()
            .cloned()
            .map(|inner| PyDistribution { inner })
            .ok_or_else(|| PyValueError::new_err(format!("`{metric}` is a scalar metric")))
    }

    fn scalar(&self, day: &str, metric: &str) -> PyResult<f64> {
        let snap = self.inner.read(date(day)?, parse(metric)?).map_err(to_py)?;
        snap.scalar()
            .ok_or_else(|| PyValueError::new_err(format!("`{metric}` is a distribution metric")))
    }

    /// Averages table as CSV text.
    #[pyo3(signature = (start, end, epsilon = timeseries::DEFAULT_EPSILON))]
    fn averages_csv(&self, start: &str, end: &str, epsilon: f64) -> PyResult<String> {
        let range = DateRange::new(date(start)?, date(end)?).map_err(to_py)?;
        let t = report::averages_table(&self.inner, range, epsilon).map_err(to_py)?;
        report::render(report::Artifact::Averages(&t), report::Format::Csv).map_err(to_py)
    }

    /// `[(metric, "0.1234567" | "n/a")]` between the first stored day and `end`.
    fn jsd_table(&self, end: &str) -> PyResult<Vec<(String, String)>> {
        let t = report::jsd_table(&self.inner, date(end)?).map_err(to_py)?;
        Ok(t.rows.iter().map(|r| (r.metric.as_str().to_owned(), r.formatted())).collect())
    }

    /// `[(date, value | None)]`.
    #[pyo3(signature = (start, end, family = "gini", exclude = Vec::new()))]
    fn master_series(&self, start: &str, end: &str, family: &str, exclude: Vec<String>) -> PyResult<Vec<(String, Option<f64>)>> {
        let range = DateRange::new(date(start)?, date(end)?).map_err(to_py)?;
        let excl = exclude.iter().map(|s| parse::<MetricId>(s)).collect::<PyResult<Vec<_>>>()?;
        let cfg = MasterConfig::new(parse(family)?).excluding(excl);
        let s = timeseries::master_series(&self.inner, &cfg, range).map_err(to_py)?;
        Ok(s.days.iter().map(|d| (d.date.to_string(), d.value())).collect())
    }
}

/// Runs the command line with `argv` (without the program name) and
/// returns the exit status.
#[pyfunction]
fn cli(argv: Vec<String>) -> i32 {
    ethconc::cli::run(std::iter::once("ethconc".to_owned()).chain(argv))
}

#[pymodule]
fn pyethconc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("EthconcError", m.py().get_type::<EthconcError>())?;
    m.add_class::<PyDistribution>()?;
    m.add_class::<PyStore>()?;
    m.add_function(wrap_pyfunction!(gini, m)?)?;
    m.add_function(wrap_pyfunction!(gini_from_lorenz, m)?)?;
    m.add_function(wrap_pyfunction!(lorenz_points, m)?)?;
    m.add_function(wrap_pyfunction!(hhi, m)?)?;
    m.add_function(wrap_pyfunction!(hhi_classify, m)?)?;
    m.add_function(wrap_pyfunction!(shannon, m)?)?;
    m.add_function(wrap_pyfunction!(shannon_normalized, m)?)?;
    m.add_function(wrap_pyfunction!(atkinson, m)?)?;
    m.add_function(wrap_pyfunction!(adjusted_aversion, m)?)?;
    m.add_function(wrap_pyfunction!(percentile, m)?)?;
    m.add_function(wrap_pyfunction!(tail_ratios, m)?)?;
    m.add_function(wrap_pyfunction!(kl_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(jsd_vectors, m)?)?;
    m.add_function(wrap_pyfunction!(jsd_normalized, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add_function(wrap_pyfunction!(master_index, m)?)?;
    m.add_function(wrap_pyfunction!(master_index_weighted, m)?)?;
    m.add_function(wrap_pyfunction!(effective_inflation, m)?)?;
    m.add_function(wrap_pyfunction!(staked_percentage, m)?)?;
    m.add_function(wrap_pyfunction!(metric_ids, m)?)?;
    m.add_function(wrap_pyfunction!(write_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(ingest_fixtures, m)?)?;
    m.add_function(wrap_pyfunction!(cli, m)?)?;
    Ok(())
}
