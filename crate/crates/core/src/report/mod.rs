//! Report artifacts: the averages table, the JSD table, per-metric index
//! series, Lorenz point sets and master-index charts.

mod emit;
pub mod svg;

use chrono::NaiveDate;
use serde::Serialize;

pub use emit::{emit, render, Artifact, Format};

use crate::error::{Error, Result};
use crate::indices::{self, LorenzPoint};
use crate::metric::MetricId;
use crate::snapshot::{DateRange, SnapshotLookup};
use crate::timeseries::{self, DailyIndices, IndexFamily, JsdIntervals};

/// Number of heat bands; band `k` covers `[k/5, (k+1)/5)`, the last one
/// closed at 1.
pub const HEAT_BANDS: u8 = 5;

/// Heat band of a concentration reading in [0, 1]; 0 is the least
/// concentrated (green), 4 the most (red).
pub fn heat_band(concentration: f64) -> u8 {
    let k = (concentration.clamp(0.0, 1.0) * f64::from(HEAT_BANDS)).floor() as u8;
    k.min(HEAT_BANDS - 1)
}

/// Heat band of an index cell. Shannon rises as control spreads out, so its
/// cells are banded on `1 − value`.
pub fn cell_band(family: IndexFamily, value: f64) -> u8 {
    match family {
        IndexFamily::ShannonNormalized => heat_band(1.0 - value),
        _ => heat_band(value),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AveragesRow {
    pub metric: MetricId,
    pub gini: Option<f64>,
    pub hhi: Option<f64>,
    pub shannon: Option<f64>,
    pub atkinson: Option<f64>,
    /// Days in the range with a stored snapshot.
    pub coverage_days: usize,
}

impl AveragesRow {
    pub fn value(&self, family: IndexFamily) -> Option<f64> {
        match family {
            IndexFamily::Gini => self.gini,
            IndexFamily::HhiRescaled => self.hhi,
            IndexFamily::ShannonNormalized => self.shannon,
            IndexFamily::Atkinson => self.atkinson,
        }
    }

    pub fn band(&self, family: IndexFamily) -> Option<u8> {
        self.value(family).map(|v| cell_band(family, v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AveragesTable {
    pub range: DateRange,
    /// Base Atkinson aversion.
    pub epsilon: f64,
    pub rows: Vec<AveragesRow>,
}

/// Mean of each daily index per distribution metric over `range`. Days
/// without a snapshot are left out of the mean; days where an index is
/// undefined are left out of that index's mean only.
pub fn averages_table(store: &impl SnapshotLookup, range: DateRange, epsilon: f64) -> Result<AveragesTable> {
    indices::AtkinsonParams::new(epsilon)?;
    let mut rows = Vec::new();
    for metric in MetricId::distributions() {
        let mut sums = [(0.0, 0usize); 4];
        let mut coverage = 0;
        for date in range.days() {
            let Some(d) = store.snapshot(date, metric).and_then(|s| s.distribution()) else {
                continue;
            };
            coverage += 1;
            let ix = timeseries::daily_indices(metric, d, epsilon)?;
            for (slot, family) in sums.iter_mut().zip(IndexFamily::ALL) {
                if let Some(v) = ix.value(family) {
                    slot.0 += v;
                    slot.1 += 1;
                }
            }
        }
        if coverage == 0 {
            continue;
        }
        let mean = |(sum, n): (f64, usize)| (n > 0).then(|| sum / n as f64);
        rows.push(AveragesRow {
            metric,
            gini: mean(sums[0]),
            hhi: mean(sums[1]),
            shannon: mean(sums[2]),
            atkinson: mean(sums[3]),
            coverage_days: coverage,
        });
    }
    if rows.is_empty() {
        return Err(Error::InvalidArgument(format!("no distribution snapshots stored in {range}")));
    }
    Ok(AveragesTable { range, epsilon, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JsdRow {
    pub metric: MetricId,
    /// Absent when either end of the range has no snapshot.
    pub value: Option<f64>,
}

impl JsdRow {
    /// Seven decimal places, `n/a` when absent.
    pub fn formatted(&self) -> String {
        self.value.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.7}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JsdTable {
    pub first: NaiveDate,
    pub last: NaiveDate,
    pub rows: Vec<JsdRow>,
}

/// JSD between the first stored day and `end`, one row per distribution
/// metric.
pub fn jsd_table(store: &impl SnapshotLookup, end: NaiveDate) -> Result<JsdTable> {
    let dates: Vec<_> = store.all_dates().into_iter().filter(|&d| d <= end).collect();
    if dates.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "JSD table needs at least 2 stored days up to {end}, found {}",
            dates.len()
        )));
    }
    jsd_table_between(store, dates[0], end)
}

/// JSD between `first` and `last` for every distribution metric.
pub fn jsd_table_between(store: &impl SnapshotLookup, first: NaiveDate, last: NaiveDate) -> Result<JsdTable> {
    if first >= last {
        return Err(Error::InsufficientData(format!(
            "JSD table needs two distinct days, got {first}..{last}"
        )));
    }
    let rows = MetricId::distributions()
        .map(|metric| JsdRow {
            metric,
            value: timeseries::jsd_between(store, metric, first, last).ok(),
        })
        .collect();
    Ok(JsdTable { first, last, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalRow {
    pub metric: MetricId,
    pub intervals: JsdIntervals,
}

/// 1/30/60/90-day divergences ending at `end` for each metric.
pub fn interval_rows(store: &impl SnapshotLookup, metrics: &[MetricId], end: NaiveDate) -> Vec<IntervalRow> {
    metrics
        .iter()
        .filter(|m| m.is_distribution())
        .map(|&metric| IntervalRow {
            metric,
            intervals: timeseries::jsd_intervals(store, metric, end),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexPoint {
    pub date: NaiveDate,
    /// Absent on days without a snapshot.
    pub indices: Option<DailyIndices>,
}

/// Daily readings of all four indices for one metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexSeries {
    pub metric: MetricId,
    pub range: DateRange,
    pub points: Vec<IndexPoint>,
}

pub fn index_series(
    store: &impl SnapshotLookup,
    metric: MetricId,
    range: DateRange,
    epsilon: f64,
) -> Result<IndexSeries> {
    if !metric.is_distribution() {
        return Err(Error::InvalidArgument(format!("`{metric}` is a scalar metric")));
    }
    let points = range
        .days()
        .map(|date| {
            let indices = match store.snapshot(date, metric).and_then(|s| s.distribution()) {
                Some(d) => Some(timeseries::daily_indices(metric, d, epsilon)?),
                None => None,
            };
            Ok(IndexPoint { date, indices })
        })
        .collect::<Result<_>>()?;
    Ok(IndexSeries { metric, range, points })
}

/// Lorenz curve of one stored snapshot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LorenzCurve {
    pub metric: MetricId,
    pub date: NaiveDate,
    pub points: Vec<LorenzPoint>,
}

pub fn lorenz_curve(store: &impl SnapshotLookup, metric: MetricId, date: NaiveDate) -> Result<LorenzCurve> {
    let snap = store.require(date, metric)?;
    let d = snap
        .distribution()
        .ok_or_else(|| Error::InvalidArgument(format!("`{metric}` is a scalar metric")))?;
    Ok(LorenzCurve {
        metric,
        date,
        points: indices::lorenz_points(d),
    })
}

/// Every index for each requested metric on one day.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DayIndices {
    pub date: NaiveDate,
    pub epsilon: f64,
    pub rows: Vec<(MetricId, DailyIndices)>,
    /// Requested metrics with no snapshot that day.
    pub missing: Vec<MetricId>,
}

pub fn day_indices(
    store: &impl SnapshotLookup,
    date: NaiveDate,
    metrics: &[MetricId],
    epsilon: f64,
) -> Result<DayIndices> {
    let mut rows = Vec::new();
    let mut missing = Vec::new();
    for &metric in metrics.iter().filter(|m| m.is_distribution()) {
        match store.snapshot(date, metric).and_then(|s| s.distribution()) {
            Some(d) => rows.push((metric, timeseries::daily_indices(metric, d, epsilon)?)),
            None => missing.push(metric),
        }
    }
    Ok(DayIndices {
        date,
        epsilon,
        rows,
        missing,
    })
}

/// Footnote attached to every rendering of Atkinson values.
pub fn atkinson_footnote(epsilon: f64) -> String {
    format!(
        "Atkinson uses aversion {epsilon}; staked-by-pool uses {epsilon} x (1 - largest pool share)."
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::ShareDistribution;
    use crate::snapshot::{MemoryStore, Payload, Snapshot};
    use chrono::{DateTime, Days};

    fn day(i: u64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2023, 5, 23).unwrap() + Days::new(i)
    }

    fn snap(i: u64, metric: MetricId, q: &[f64]) -> Snapshot {
        Snapshot::new(
            day(i),
            metric,
            Payload::Distribution(ShareDistribution::from_quantities(q).unwrap()),
            "test",
            DateTime::UNIX_EPOCH,
        )
        .unwrap()
    }

    #[test]
    fn heat_bands_are_fifths() {
        assert_eq!(heat_band(0.0), 0);
        assert_eq!(heat_band(0.1999), 0);
        assert_eq!(heat_band(0.2), 1);
        assert_eq!(heat_band(0.79), 3);
        assert_eq!(heat_band(0.8), 4);
        assert_eq!(heat_band(1.0), 4);
        assert_eq!(cell_band(IndexFamily::ShannonNormalized, 1.0), 0);
    }

    #[test]
    fn single_day_table_equals_that_day() {
        let q = [5.0, 3.0, 1.0, 1.0];
        let store: MemoryStore = [snap(0, MetricId::BlocksByBuilder, &q)].into_iter().collect();
        let t = averages_table(&store, DateRange::single(day(0)), 0.5).unwrap();
        assert_eq!(t.rows.len(), 1);
        let d = ShareDistribution::from_quantities(&q).unwrap();
        let ix = timeseries::daily_indices(MetricId::BlocksByBuilder, &d, 0.5).unwrap();
        let row = &t.rows[0];
        assert_eq!(row.gini, Some(ix.gini));
        assert_eq!(row.hhi, Some(ix.hhi));
        assert_eq!(row.shannon, ix.shannon);
        assert_eq!(row.atkinson, ix.atkinson.map(|a| a.value));
        assert_eq!(row.coverage_days, 1);
    }

    #[test]
    fn alternating_values_average_to_midpoint() {
        // Gini of [1, 1] is 0, of [1, 0] is 0.5.
        let store: MemoryStore = (0..10)
            .map(|i| snap(i, MetricId::RollupsByTvl, if i % 2 == 0 { &[1.0, 1.0] } else { &[1.0, 0.0] }))
            .collect();
        let t = averages_table(&store, DateRange::new(day(0), day(9)).unwrap(), 0.5).unwrap();
        assert!((t.rows[0].gini.unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(t.rows[0].coverage_days, 10);

        let wider = averages_table(&store, DateRange::new(day(0), day(20)).unwrap(), 0.5).unwrap();
        assert_eq!(wider.rows[0], t.rows[0]);
    }

    #[test]
    fn empty_range_is_invalid() {
        let store: MemoryStore = [snap(0, MetricId::RollupsByTvl, &[1.0, 2.0])].into_iter().collect();
        assert!(matches!(
            averages_table(&store, DateRange::single(day(5)), 0.5),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn jsd_table_rows_and_format() {
        let mut store = MemoryStore::new();
        for i in 0..3 {
            store.insert(snap(i, MetricId::BlocksByRelay, &[2.0, 1.0]));
            let builders: &[f64] = if i == 2 { &[0.0, 1.0] } else { &[76.0, 24.0] };
            store.insert(snap(i, MetricId::BlocksByBuilder, builders));
        }
        let t = jsd_table(&store, day(2)).unwrap();
        assert_eq!((t.first, t.last), (day(0), day(2)));
        let order: Vec<_> = t.rows.iter().map(|r| r.metric).collect();
        assert_eq!(order, MetricId::distributions().collect::<Vec<_>>());
        let relay = t.rows.iter().find(|r| r.metric == MetricId::BlocksByRelay).unwrap();
        assert_eq!(relay.formatted(), "0.0000000");
        let builder = t.rows.iter().find(|r| r.metric == MetricId::BlocksByBuilder).unwrap();
        assert!(builder.value.unwrap() > 0.1);
        assert_eq!(builder.formatted().split('.').nth(1).unwrap().len(), 7);
        let missing = t.rows.iter().find(|r| r.metric == MetricId::RollupsByTvl).unwrap();
        assert_eq!(missing.formatted(), "n/a");

        assert!(matches!(jsd_table(&store, day(0)), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn series_marks_missing_days() {
        let store: MemoryStore = [snap(0, MetricId::RollupsByTvl, &[1.0, 2.0]), snap(2, MetricId::RollupsByTvl, &[1.0, 2.0])]
            .into_iter()
            .collect();
        let s = index_series(&store, MetricId::RollupsByTvl, DateRange::new(day(0), day(2)).unwrap(), 0.5).unwrap();
        let present: Vec<_> = s.points.iter().map(|p| p.indices.is_some()).collect();
        assert_eq!(present, [true, false, true]);
    }
}
