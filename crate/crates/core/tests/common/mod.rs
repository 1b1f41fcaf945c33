#![allow(dead_code)]

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use ethconc::cli::master_series_for;
use ethconc::indices::{self, AtkinsonParams};
use ethconc::ingestion::{self, FetchConfig, SnapshotStore};
use ethconc::report::{self, Artifact, Format};
use ethconc::timeseries::{IndexFamily, DEFAULT_EPSILON};
use ethconc::{DateRange, MetricId, MetricRegistry, ShareDistribution};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const CORPUS_START: &str = "2023-05-23";
pub const CORPUS_END: &str = "2023-08-20";
pub const CORPUS_SEED: u64 = 2023;
pub const AA: [MetricId; 2] = [MetricId::UseropsByBundler, MetricId::WalletsByDeployer];

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn corpus_dir() -> PathBuf {
    fixtures_dir().join("corpus")
}

pub fn golden_dir() -> PathBuf {
    fixtures_dir().join("golden")
}

pub fn corpus_range() -> DateRange {
    format!("{CORPUS_START}..{CORPUS_END}").parse().unwrap()
}

pub fn day(s: &str) -> NaiveDate {
    s.parse().unwrap()
}

/// Ingests the committed corpus into `store`; returns (stored, failed).
pub fn ingest_corpus(store: &Path) -> (usize, usize) {
    let mut st = SnapshotStore::open_writable(store).unwrap();
    let cfg = FetchConfig::fixtures(corpus_dir());
    let specs = ingestion::default_sources();
    let (mut stored, mut failed) = (0, 0);
    for date in corpus_range().days() {
        let r = ingestion::ingest_day(&specs, date, &cfg, &mut st, false);
        stored += r.stored();
        failed += r.failed();
    }
    (stored, failed)
}

/// The three regression artifacts as CSV: averages, JSD table and master
/// series with account-abstraction metrics excluded.
pub fn pipeline_outputs(store: &Path) -> [(String, String); 3] {
    let st = SnapshotStore::open(store).unwrap();
    let range = corpus_range();
    let averages = report::averages_table(&st, range, DEFAULT_EPSILON).unwrap();
    let jsd = report::jsd_table(&st, range.end).unwrap();
    let master = master_series_for(&st, range, &IndexFamily::ALL, &MetricRegistry::default(), &AA, DEFAULT_EPSILON).unwrap();
    [
        ("averages.csv".into(), report::render(Artifact::Averages(&averages), Format::Csv).unwrap()),
        ("jsd-table.csv".into(), report::render(Artifact::Jsd(&jsd), Format::Csv).unwrap()),
        ("master.csv".into(), report::render(Artifact::Master(&master), Format::Csv).unwrap()),
    ]
}

/// A random distribution of `n` entities drawn from a few shapes, with
/// some zero entries.
pub fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> ShareDistribution {
    let shape = rng.random_range(0..4);
    let mut q: Vec<f64> = (0..n)
        .map(|_| match shape {
            0 => rng.random::<f64>(),
            1 => (1.0 - rng.random::<f64>()).powf(-1.0 / 1.16),
            2 => rng.random_range(0..20) as f64,
            _ => {
                let u: f64 = rng.random();
                if u < 0.3 { 0.0 } else { u * 1e6 }
            }
        })
        .collect();
    if q.iter().all(|&x| x == 0.0) {
        q[0] = 1.0;
    }
    ShareDistribution::from_quantities(&q).unwrap()
}

/// Random distribution over labels drawn from a pool, so two draws only
/// partly overlap.
pub fn random_labeled(rng: &mut ChaCha8Rng, pool: usize) -> ShareDistribution {
    let mut labels: Vec<usize> = (0..pool).collect();
    labels.shuffle(rng);
    let k = rng.random_range(1..=pool);
    let mut entries: Vec<(String, f64)> = labels[..k]
        .iter()
        .map(|i| (format!("l{i:03}"), if rng.random::<f64>() < 0.2 { 0.0 } else { rng.random::<f64>() * 100.0 }))
        .collect();
    if entries.iter().all(|e| e.1 == 0.0) {
        entries[0].1 = 1.0;
    }
    ShareDistribution::new(entries).unwrap()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// All four indices of a distribution at a given aversion.
pub fn readings(d: &ShareDistribution, eps: f64) -> [f64; 4] {
    [
        indices::gini(d),
        indices::hhi(d),
        indices::shannon(d),
        indices::atkinson(d, AtkinsonParams::new(eps).unwrap()).value,
    ]
}

pub fn check_scale_invariance(d: &ShareDistribution, factor: f64) -> Result<(), String> {
    let a = readings(d, 0.5);
    let b = readings(&d.scaled(factor).unwrap(), 0.5);
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        if !close(*x, *y, 1e-9) {
            return Err(format!("index {i}: {x} vs {y} after scaling by {factor}"));
        }
    }
    Ok(())
}

pub fn check_permutation_invariance(d: &ShareDistribution, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut entries = d.entries().to_vec();
    entries.shuffle(rng);
    let p = ShareDistribution::from_entries(entries).unwrap();
    let (a, b) = (readings(d, 0.5), readings(&p, 0.5));
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        if !close(*x, *y, 1e-12) {
            return Err(format!("index {i}: {x} vs {y} after shuffling"));
        }
    }
    if indices::jsd_normalized(d, &p) > 1e-12 {
        return Err("JSD between a distribution and its shuffle is nonzero".into());
    }
    Ok(())
}

pub fn check_atkinson_monotone(d: &ShareDistribution) -> Result<(), String> {
    let eps = [0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0];
    let vals: Vec<f64> = eps
        .iter()
        .map(|&e| indices::atkinson(d, AtkinsonParams::new(e).unwrap()).value)
        .collect();
    for w in vals.windows(2) {
        if w[1] < w[0] - 1e-12 {
            return Err(format!("Atkinson decreased in epsilon: {vals:?}"));
        }
    }
    Ok(())
}

/// Moves `fraction` of the gap between a richer and a poorer entity from the
/// richer to the poorer; order is preserved so inequality must not rise.
pub fn check_pigou_dalton(d: &ShareDistribution, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut q: Vec<f64> = d.quantities().collect();
    let n = q.len();
    let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
    let (rich, poor) = if q[i] >= q[j] { (i, j) } else { (j, i) };
    if q[rich] - q[poor] <= 1e-9 * q[rich] {
        return Ok(());
    }
    let t = (q[rich] - q[poor]) * rng.random_range(0.01..0.5);
    q[rich] -= t;
    q[poor] += t;
    let after = ShareDistribution::from_quantities(&q).unwrap();
    let before = ShareDistribution::from_quantities(&d.quantities().collect::<Vec<_>>()).unwrap();
    let (b, a) = (readings(&before, 0.5), readings(&after, 0.5));
    let tol = 1e-12;
    if a[0] > b[0] + tol {
        return Err(format!("Gini rose {} -> {}", b[0], a[0]));
    }
    if a[1] > b[1] + tol {
        return Err(format!("HHI rose {} -> {}", b[1], a[1]));
    }
    if a[2] < b[2] - tol {
        return Err(format!("Shannon fell {} -> {}", b[2], a[2]));
    }
    if a[3] > b[3] + tol {
        return Err(format!("Atkinson rose {} -> {}", b[3], a[3]));
    }
    Ok(())
}
