//! Append-only daily snapshot store.
//!
//! Records live under `<root>/snapshots/<metric>/<YYYY-MM>.jsonl`, one JSON
//! object per line:
//!
//! ```text
//! {"schema_version":1,"date":"2023-05-23","metric":"blocks-by-builder",
//!  "kind":"distribution","entries":[{"label":"beaverbuild","quantity":1520.0}],
//!  "source":"fixture:mevboost-pics-builders","fetched_at":"2023-05-23T00:00:00Z"}
//! ```
//!
//! Scalar records carry `"value"` instead of `"entries"`. Replacing a record
//! appends a newer line; the last line for a `(date, metric)` wins.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::distribution::{Entry, ShareDistribution};
use crate::error::{Error, Result};
use crate::metric::{MetricId, MetricKind};
use crate::snapshot::{MemoryStore, Payload, Snapshot, SnapshotLookup};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    schema_version: u32,
    date: NaiveDate,
    metric: MetricId,
    kind: MetricKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    source: String,
    fetched_at: String,
}

/// Serializes a snapshot to its single-line record form (no newline).
pub fn encode(snapshot: &Snapshot) -> String {
    let (entries, value) = match snapshot.payload() {
        Payload::Distribution(d) => (Some(d.entries().to_vec()), None),
        Payload::Scalar(v) => (None, Some(*v)),
    };
    let record = Record {
        schema_version: SCHEMA_VERSION,
        date: snapshot.date(),
        metric: snapshot.metric(),
        kind: snapshot.metric().kind(),
        entries,
        value,
        source: snapshot.source().to_owned(),
        fetched_at: snapshot
            .fetched_at()
            .to_rfc3339_opts(SecondsFormat::AutoSi, true),
    };
    serde_json::to_string(&record).expect("records always serialize")
}

/// Parses one record line.
pub fn decode(line: &str) -> std::result::Result<Snapshot, String> {
    let r: Record = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if r.schema_version != SCHEMA_VERSION {
        return Err(format!("unsupported schema_version {}", r.schema_version));
    }
    if r.kind != r.metric.kind() {
        return Err(format!("kind {:?} does not match metric `{}`", r.kind, r.metric));
    }
    let payload = match (r.kind, r.entries, r.value) {
        (MetricKind::Distribution, Some(entries), None) => {
            Payload::Distribution(ShareDistribution::from_entries(entries).map_err(|e| e.to_string())?)
        }
        (MetricKind::Scalar, None, Some(v)) => Payload::Scalar(v),
        _ => return Err("record must carry exactly one of `entries` or `value`".into()),
    };
    let fetched_at = DateTime::parse_from_rfc3339(&r.fetched_at)
        .map_err(|e| format!("bad fetched_at: {e}"))?
        .with_timezone(&Utc);
    Snapshot::new(r.date, r.metric, payload, r.source, fetched_at).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PutOutcome {
    Stored,
    Replaced,
}

/// On-disk snapshot store with an in-memory index.
///
/// Any number of readers may open a store; a writable handle holds an
/// exclusive lock on `<root>/.lock` until dropped.
#[derive(Debug)]
pub struct SnapshotStore {
    root: PathBuf,
    index: MemoryStore,
    lines: BTreeMap<(MetricId, NaiveDate), String>,
    lock: Option<File>,
}

impl SnapshotStore {
    /// Opens read-only. A missing root is an empty store.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let mut store = Self {
            root: root.into(),
            index: MemoryStore::new(),
            lines: BTreeMap::new(),
            lock: None,
        };
        store.load()?;
        Ok(store)
    }

    pub fn open_writable(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(root.join("snapshots"))?;
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(root.join(".lock"))?;
        lock.try_lock().map_err(|e| match e {
            fs::TryLockError::WouldBlock => Error::StoreLocked(root.clone()),
            fs::TryLockError::Error(io) => Error::Io(io),
        })?;
        let mut store = Self::open(root)?;
        store.lock = Some(lock);
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn contains(&self, date: NaiveDate, metric: MetricId) -> bool {
        self.lines.contains_key(&(metric, date))
    }

    fn file_for(&self, metric: MetricId, date: NaiveDate) -> PathBuf {
        self.root
            .join("snapshots")
            .join(metric.as_str())
            .join(format!("{}.jsonl", date.format("%Y-%m")))
    }

    fn load(&mut self) -> Result<()> {
        let base = self.root.join("snapshots");
        if !base.is_dir() {
            return Ok(());
        }
        let mut files = Vec::new();
        for metric_dir in fs::read_dir(&base)? {
            let metric_dir = metric_dir?.path();
            if !metric_dir.is_dir() {
                continue;
            }
            for f in fs::read_dir(&metric_dir)? {
                let f = f?.path();
                if f.extension().is_some_and(|e| e == "jsonl") {
                    files.push(f);
                }
            }
        }
        files.sort();
        for path in files {
            let reader = BufReader::new(File::open(&path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let snapshot = decode(&line).map_err(|message| Error::CorruptRecord {
                    path: path.clone(),
                    line: i + 1,
                    message,
                })?;
                self.lines.insert((snapshot.metric(), snapshot.date()), line);
                self.index.insert(snapshot);
            }
        }
        Ok(())
    }

    /// Appends a snapshot. Without `overwrite` an existing `(date, metric)`
    /// is rejected with [`Error::AlreadyStored`].
    pub fn put(&mut self, snapshot: Snapshot, overwrite: bool) -> Result<PutOutcome> {
        if self.lock.is_none() {
            return Err(Error::invalid_argument("store was opened read-only"));
        }
        let key = (snapshot.metric(), snapshot.date());
        let exists = self.lines.contains_key(&key);
        if exists && !overwrite {
            return Err(Error::AlreadyStored {
                date: snapshot.date(),
                metric: snapshot.metric(),
            });
        }
        let line = encode(&snapshot);
        let path = self.file_for(snapshot.metric(), snapshot.date());
        fs::create_dir_all(path.parent().expect("file has a parent"))?;
        let mut file = OpenOptions::new().create(true).append(true).open(&path)?;
        writeln!(file, "{line}")?;
        file.sync_data()?;
        self.lines.insert(key, line);
        self.index.insert(snapshot);
        Ok(if exists {
            PutOutcome::Replaced
        } else {
            PutOutcome::Stored
        })
    }

    pub fn read(&self, date: NaiveDate, metric: MetricId) -> Result<Snapshot> {
        self.require(date, metric).cloned()
    }

    /// The stored line for a record, exactly as written.
    pub fn record_line(&self, date: NaiveDate, metric: MetricId) -> Option<&str> {
        self.lines.get(&(metric, date)).map(String::as_str)
    }

    pub fn snapshots(&self) -> &MemoryStore {
        &self.index
    }
}

impl SnapshotLookup for SnapshotStore {
    fn snapshot(&self, date: NaiveDate, metric: MetricId) -> Option<&Snapshot> {
        self.index.snapshot(date, metric)
    }

    fn dates(&self, metric: MetricId) -> Vec<NaiveDate> {
        self.index.dates(metric)
    }
}
