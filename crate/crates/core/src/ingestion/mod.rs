//! Daily ingestion: fetch each source, parse it into a snapshot and append
//! it to the store.

pub mod corpus;
pub mod fetch;
pub mod parse;
pub mod source;
pub mod store;

use std::fmt;
use std::thread;

use chrono::NaiveDate;

pub use fetch::{fetch, FetchConfig, FetchMode, HttpConfig, RawPayload};
pub use parse::parse;
pub use source::{default_sources, scalar_sources, Parser, SourceSpec};
pub use store::{PutOutcome, SnapshotStore};

use crate::error::Result;
use crate::metric::MetricId;
use crate::snapshot::Snapshot;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Stored,
    Replaced,
    /// Already in the store and overwrite was not requested.
    Skipped,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceOutcome {
    pub source_id: String,
    pub metric: MetricId,
    pub outcome: Outcome,
}

impl fmt::Display for SourceOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match &self.outcome {
            Outcome::Stored => "stored".to_owned(),
            Outcome::Replaced => "replaced".to_owned(),
            Outcome::Skipped => "skipped (already stored)".to_owned(),
            Outcome::Failed(e) => format!("FAILED: {e}"),
        };
        write!(f, "{:<34} {:<28} {what}", self.source_id, self.metric.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestReport {
    pub date: NaiveDate,
    pub outcomes: Vec<SourceOutcome>,
}

impl IngestReport {
    fn count(&self, pred: impl Fn(&Outcome) -> bool) -> usize {
        self.outcomes.iter().filter(|o| pred(&o.outcome)).count()
    }

    /// Newly stored or replaced.
    pub fn stored(&self) -> usize {
        self.count(|o| matches!(o, Outcome::Stored | Outcome::Replaced))
    }

    pub fn skipped(&self) -> usize {
        self.count(|o| *o == Outcome::Skipped)
    }

    pub fn failed(&self) -> usize {
        self.count(|o| matches!(o, Outcome::Failed(_)))
    }
}

/// Ingests one day. Sources are fetched concurrently; a failing source is
/// recorded in the report and does not stop the others.
pub fn ingest_day(
    specs: &[SourceSpec],
    date: NaiveDate,
    config: &FetchConfig,
    store: &mut SnapshotStore,
    overwrite: bool,
) -> IngestReport {
    let pending: Vec<&SourceSpec> = specs
        .iter()
        .filter(|s| overwrite || !store.contains(date, s.metric))
        .collect();
    let fetched: Vec<Result<Snapshot>> = thread::scope(|scope| {
        let handles: Vec<_> = pending
            .iter()
            .map(|spec| scope.spawn(move || fetch(spec, date, config).and_then(|raw| parse(spec, &raw))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fetch worker panicked"))
            .collect()
    });
    let mut fetched = pending.into_iter().zip(fetched);

    let mut outcomes = Vec::with_capacity(specs.len());
    for spec in specs {
        let outcome = if !overwrite && store.contains(date, spec.metric) {
            Outcome::Skipped
        } else {
            let (_, result) = fetched.next().expect("one result per pending source");
            match result.and_then(|snap| store.put(snap, overwrite)) {
                Ok(PutOutcome::Stored) => Outcome::Stored,
                Ok(PutOutcome::Replaced) => Outcome::Replaced,
                Err(e) => {
                    log::error!("{}: {e}", spec.source_id);
                    Outcome::Failed(e.to_string())
                }
            }
        };
        outcomes.push(SourceOutcome {
            source_id: spec.source_id.clone(),
            metric: spec.metric,
            outcome,
        });
    }
    IngestReport { date, outcomes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn partial_failure_keeps_other_sources() {
        let fixtures = tempfile::tempdir().unwrap();
        let store_dir = tempfile::tempdir().unwrap();
        let date: NaiveDate = "2023-05-23".parse().unwrap();
        let specs: Vec<_> = default_sources().into_iter().take(3).collect();
        let write = |id: &str, body: &str| {
            let p = fetch::fixture_path(fixtures.path(), id, date);
            fs::create_dir_all(p.parent().unwrap()).unwrap();
            fs::write(p, body).unwrap();
        };
        write(&specs[0].source_id, r#"{"teku": 3, "prysm": 5}"#);
        write(&specs[1].source_id, "{}");
        // third fixture missing

        let cfg = FetchConfig::fixtures(fixtures.path());
        let mut store = SnapshotStore::open_writable(store_dir.path()).unwrap();
        let report = ingest_day(&specs, date, &cfg, &mut store, false);
        assert_eq!((report.stored(), report.failed()), (1, 2));
        assert!(matches!(&report.outcomes[1].outcome, Outcome::Failed(m) if m.contains("schema")));
        assert!(matches!(&report.outcomes[2].outcome, Outcome::Failed(m) if m.contains("fixture")));

        let again = ingest_day(&specs, date, &cfg, &mut store, false);
        assert_eq!(again.skipped(), 1);
        let forced = ingest_day(&specs[..1], date, &cfg, &mut store, true);
        assert_eq!(forced.outcomes[0].outcome, Outcome::Replaced);
    }
}
