//! Daily snapshots and read access to collections of them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Days, NaiveDate, Utc};

use crate::distribution::ShareDistribution;
use crate::error::{Error, Result};
use crate::metric::{MetricId, MetricKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Distribution(ShareDistribution),
    Scalar(f64),
}

impl Payload {
    pub fn kind(&self) -> MetricKind {
        match self {
            Payload::Distribution(_) => MetricKind::Distribution,
            Payload::Scalar(_) => MetricKind::Scalar,
        }
    }
}

/// One day's recorded value for one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    date: NaiveDate,
    metric: MetricId,
    payload: Payload,
    source: String,
    fetched_at: DateTime<Utc>,
}

impl Snapshot {
    pub fn new(
        date: NaiveDate,
        metric: MetricId,
        payload: Payload,
        source: impl Into<String>,
        fetched_at: DateTime<Utc>,
    ) -> Result<Self> {
        if payload.kind() != metric.kind() {
            return Err(Error::invalid_argument(format!(
                "`{metric}` expects a {:?} payload, got {:?}",
                metric.kind(),
                payload.kind()
            )));
        }
        if let Payload::Scalar(v) = payload {
            if !v.is_finite() {
                return Err(Error::invalid_argument(format!(
                    "scalar value for `{metric}` must be finite"
                )));
            }
        }
        Ok(Self {
            date,
            metric,
            payload,
            source: source.into(),
            fetched_at,
        })
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn metric(&self) -> MetricId {
        self.metric
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn fetched_at(&self) -> DateTime<Utc> {
        self.fetched_at
    }

    pub fn distribution(&self) -> Option<&ShareDistribution> {
        match &self.payload {
            Payload::Distribution(d) => Some(d),
            Payload::Scalar(_) => None,
        }
    }

    pub fn scalar(&self) -> Option<f64> {
        match self.payload {
            Payload::Scalar(v) => Some(v),
            Payload::Distribution(_) => None,
        }
    }
}

/// Read access to snapshots keyed by `(date, metric)`.
pub trait SnapshotLookup {
    fn snapshot(&self, date: NaiveDate, metric: MetricId) -> Option<&Snapshot>;

    /// Stored dates for `metric`, ascending.
    fn dates(&self, metric: MetricId) -> Vec<NaiveDate>;

    fn require(&self, date: NaiveDate, metric: MetricId) -> Result<&Snapshot> {
        self.snapshot(date, metric)
            .ok_or(Error::MissingData { date, metric })
    }

    /// Every stored date across all metrics, ascending and deduplicated.
    fn all_dates(&self) -> Vec<NaiveDate> {
        let mut dates: Vec<_> = MetricId::ALL
            .into_iter()
            .flat_map(|m| self.dates(m))
            .collect();
        dates.sort_unstable();
        dates.dedup();
        dates
    }

    /// The most recent run of consecutive stored days.
    fn latest_contiguous_range(&self) -> Option<DateRange> {
        let dates = self.all_dates();
        let end = *dates.last()?;
        let mut start = end;
        for &d in dates.iter().rev().skip(1) {
            if d.succ_opt() == Some(start) {
                start = d;
            } else {
                break;
            }
        }
        Some(DateRange { start, end })
    }
}

/// In-memory collection of snapshots; later inserts replace earlier ones.
#[derive(Debug, Clone, Default)]
pub struct MemoryStore {
    records: BTreeMap<MetricId, BTreeMap<NaiveDate, Snapshot>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, snapshot: Snapshot) -> Option<Snapshot> {
        self.records
            .entry(snapshot.metric)
            .or_default()
            .insert(snapshot.date, snapshot)
    }

    pub fn len(&self) -> usize {
        self.records.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Snapshot> {
        self.records.values().flat_map(BTreeMap::values)
    }
}

impl FromIterator<Snapshot> for MemoryStore {
    fn from_iter<I: IntoIterator<Item = Snapshot>>(iter: I) -> Self {
        let mut store = MemoryStore::new();
        for s in iter {
            store.insert(s);
        }
        store
    }
}

impl SnapshotLookup for MemoryStore {
    fn snapshot(&self, date: NaiveDate, metric: MetricId) -> Option<&Snapshot> {
        self.records.get(&metric)?.get(&date)
    }

    fn dates(&self, metric: MetricId) -> Vec<NaiveDate> {
        self.records
            .get(&metric)
            .map(|m| m.keys().copied().collect())
            .unwrap_or_default()
    }
}

/// Inclusive range of calendar days, written `YYYY-MM-DD..YYYY-MM-DD`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if end < start {
            return Err(Error::invalid_argument(format!(
                "empty date range {start}..{end}"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn single(date: NaiveDate) -> Self {
        Self {
            start: date,
            end: date,
        }
    }

    /// Range of `days` days ending on `end`.
    pub fn ending(end: NaiveDate, days: u64) -> Result<Self> {
        if days == 0 {
            return Err(Error::invalid_argument("range must cover at least one day"));
        }
        let start = end
            .checked_sub_days(Days::new(days - 1))
            .ok_or_else(|| Error::invalid_argument("date out of range"))?;
        Ok(Self { start, end })
    }

    pub fn len_days(&self) -> usize {
        (self.end - self.start).num_days() as usize + 1
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }

    pub fn days(&self) -> impl Iterator<Item = NaiveDate> {
        let end = self.end;
        self.start.iter_days().take_while(move |d| *d <= end)
    }
}

impl fmt::Display for DateRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for DateRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| Error::invalid_argument(format!("expected START..END, got `{s}`")))?;
        let parse = |t: &str| {
            NaiveDate::parse_from_str(t.trim(), "%Y-%m-%d")
                .map_err(|e| Error::invalid_argument(format!("bad date `{t}`: {e}")))
        };
        DateRange::new(parse(a)?, parse(b)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn scalar(date: &str, v: f64) -> Snapshot {
        Snapshot::new(
            day(date),
            MetricId::StakedSupplyPercentage,
            Payload::Scalar(v),
            "test",
            DateTime::UNIX_EPOCH,
        )
        .unwrap()
    }

    #[test]
    fn payload_kind_must_match_metric() {
        let err = Snapshot::new(
            day("2023-05-23"),
            MetricId::BlocksByBuilder,
            Payload::Scalar(1.0),
            "test",
            DateTime::UNIX_EPOCH,
        );
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn range_parsing_and_iteration() {
        let r: DateRange = "2023-05-23..2023-05-25".parse().unwrap();
        assert_eq!(r.len_days(), 3);
        assert_eq!(r.days().last(), Some(day("2023-05-25")));
        assert!("2023-05-25..2023-05-23".parse::<DateRange>().is_err());
        assert!("2023-05-25".parse::<DateRange>().is_err());
        assert_eq!(
            DateRange::ending(day("2023-08-20"), 90).unwrap().start,
            day("2023-05-23")
        );
    }

    #[test]
    fn latest_contiguous_run() {
        let store: MemoryStore = ["2023-05-01", "2023-05-03", "2023-05-04", "2023-05-05"]
            .into_iter()
            .map(|d| scalar(d, 0.2))
            .collect();
        assert_eq!(
            store.latest_contiguous_range(),
            Some(DateRange::new(day("2023-05-03"), day("2023-05-05")).unwrap())
        );
        assert!(MemoryStore::new().latest_contiguous_range().is_none());
    }
}
