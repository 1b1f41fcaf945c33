//! Analytics over stored snapshots: divergence between dates, the per-day
//! master index and the scalar economic metrics.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use serde::Serialize;

use crate::distribution::ShareDistribution;
use crate::error::{Error, Result};
use crate::indices::{self, AtkinsonIndex, AtkinsonParams};
use crate::metric::{MetricId, MetricRegistry};
use crate::snapshot::{DateRange, SnapshotLookup};

/// Default inequality aversion for Atkinson readings.
pub const DEFAULT_EPSILON: f64 = 0.5;

/// Lower bound applied to each `β·ω·100` factor of the master index product.
pub const FACTOR_FLOOR: f64 = 1e-9;

/// Divergence horizons in days.
pub const HORIZONS: [u64; 4] = [1, 30, 60, 90];

fn stored_distribution(
    store: &impl SnapshotLookup,
    metric: MetricId,
    date: NaiveDate,
) -> Result<&ShareDistribution> {
    if !metric.is_distribution() {
        return Err(Error::invalid_argument(format!(
            "`{metric}` is a scalar metric"
        )));
    }
    store
        .require(date, metric)?
        .distribution()
        .ok_or_else(|| Error::invalid_argument(format!("`{metric}` snapshot has no distribution")))
}

/// Normalized JSD between the stored distributions of `metric` on two dates.
pub fn jsd_between(
    store: &impl SnapshotLookup,
    metric: MetricId,
    d1: NaiveDate,
    d2: NaiveDate,
) -> Result<f64> {
    let p = stored_distribution(store, metric, d1)?;
    let q = stored_distribution(store, metric, d2)?;
    Ok(indices::jsd_normalized(p, q))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JsdIntervals {
    pub end: NaiveDate,
    pub one_day: Option<f64>,
    pub thirty_day: Option<f64>,
    pub sixty_day: Option<f64>,
    pub ninety_day: Option<f64>,
}

impl JsdIntervals {
    /// `(horizon in days, value)` pairs in ascending horizon order.
    pub fn values(&self) -> [(u64, Option<f64>); 4] {
        [
            (1, self.one_day),
            (30, self.thirty_day),
            (60, self.sixty_day),
            (90, self.ninety_day),
        ]
    }
}

/// Compares `end` with `end − h` for each horizon `h`. Missing snapshots
/// leave the corresponding entry empty.
pub fn jsd_intervals(store: &impl SnapshotLookup, metric: MetricId, end: NaiveDate) -> JsdIntervals {
    let at = |h: u64| {
        let start = end.checked_sub_days(Days::new(h))?;
        jsd_between(store, metric, start, end).ok()
    };
    JsdIntervals {
        end,
        one_day: at(1),
        thirty_day: at(30),
        sixty_day: at(60),
        ninety_day: at(90),
    }
}

/// The index a master series aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexFamily {
    Gini,
    HhiRescaled,
    ShannonNormalized,
    Atkinson,
}

impl IndexFamily {
    pub const ALL: [IndexFamily; 4] = [
        IndexFamily::Gini,
        IndexFamily::HhiRescaled,
        IndexFamily::ShannonNormalized,
        IndexFamily::Atkinson,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IndexFamily::Gini => "gini",
            IndexFamily::HhiRescaled => "hhi",
            IndexFamily::ShannonNormalized => "shannon",
            IndexFamily::Atkinson => "atkinson",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            IndexFamily::Gini => "Gini",
            IndexFamily::HhiRescaled => "HHI (rescaled)",
            IndexFamily::ShannonNormalized => "Shannon (normalized)",
            IndexFamily::Atkinson => "Atkinson",
        }
    }
}

impl fmt::Display for IndexFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IndexFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gini" => Ok(IndexFamily::Gini),
            "hhi" | "hhi-rescaled" => Ok(IndexFamily::HhiRescaled),
            "shannon" | "shannon-normalized" => Ok(IndexFamily::ShannonNormalized),
            "atkinson" => Ok(IndexFamily::Atkinson),
            _ => Err(Error::invalid_argument(format!("unknown index family `{s}`"))),
        }
    }
}

/// All four index readings of one distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DailyIndices {
    pub gini: f64,
    pub hhi: f64,
    /// Absent for single-category distributions.
    pub shannon: Option<f64>,
    /// Absent when the aversion adjustment is undefined (a single entity
    /// holds everything).
    pub atkinson: Option<AtkinsonIndex>,
    /// Aversion actually used for `atkinson`.
    pub epsilon: f64,
}

impl DailyIndices {
    pub fn value(&self, family: IndexFamily) -> Option<f64> {
        match family {
            IndexFamily::Gini => Some(self.gini),
            IndexFamily::HhiRescaled => Some(self.hhi),
            IndexFamily::ShannonNormalized => self.shannon,
            IndexFamily::Atkinson => self.atkinson.map(|a| a.value),
        }
    }
}

/// Aversion used for `metric`'s Atkinson reading. Staked-by-pool scales the
/// base down by the largest pool's share.
pub fn atkinson_epsilon(metric: MetricId, d: &ShareDistribution, base: f64) -> Result<f64> {
    if metric == MetricId::StakedByPool {
        indices::adjusted_aversion(base, d.max_share())
    } else {
        AtkinsonParams::new(base).map(AtkinsonParams::epsilon)
    }
}

pub fn daily_indices(metric: MetricId, d: &ShareDistribution, base_epsilon: f64) -> Result<DailyIndices> {
    AtkinsonParams::new(base_epsilon)?;
    let (epsilon, atkinson) = match atkinson_epsilon(metric, d, base_epsilon) {
        Ok(eps) => (eps, Some(indices::atkinson(d, AtkinsonParams::new(eps)?))),
        Err(_) => (base_epsilon, None),
    };
    Ok(DailyIndices {
        gini: indices::gini(d),
        hhi: indices::hhi(d),
        shannon: indices::shannon_normalized(d).ok(),
        atkinson,
        epsilon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MasterComponent {
    pub metric: MetricId,
    /// Index value β ∈ [0, 1].
    pub value: f64,
    /// Normalized weight ω.
    pub weight: f64,
}

/// One day's inputs to the master index of one family.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterIndexInput {
    date: NaiveDate,
    family: IndexFamily,
    components: Vec<MasterComponent>,
}

impl MasterIndexInput {
    pub fn new(date: NaiveDate, family: IndexFamily, components: Vec<MasterComponent>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for c in &components {
            if !seen.insert(c.metric) {
                return Err(Error::invalid_argument(format!("`{}` listed twice", c.metric)));
            }
            if !(0.0..=1.0).contains(&c.value) {
                return Err(Error::invalid_argument(format!(
                    "value for `{}` must lie in [0, 1], got {}",
                    c.metric, c.value
                )));
            }
            if !(c.weight.is_finite() && c.weight >= 0.0) {
                return Err(Error::invalid_argument(format!(
                    "weight for `{}` must be nonnegative, got {}",
                    c.metric, c.weight
                )));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if !components.is_empty() && (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid_argument(format!(
                "normalized weights must sum to 1, got {total}"
            )));
        }
        Ok(Self {
            date,
            family,
            components,
        })
    }

    /// Builds an input from raw values, normalizing `registry` weights over
    /// the given metrics.
    pub fn from_values(
        date: NaiveDate,
        family: IndexFamily,
        values: &[(MetricId, f64)],
        registry: &MetricRegistry,
    ) -> Result<Self> {
        let metrics: Vec<_> = values.iter().map(|&(m, _)| m).collect();
        let weights = registry.normalized_weights(&metrics)?;
        let components = values
            .iter()
            .zip(weights)
            .map(|(&(metric, value), weight)| MasterComponent { metric, value, weight })
            .collect();
        Self::new(date, family, components)
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn family(&self) -> IndexFamily {
        self.family
    }

    pub fn components(&self) -> &[MasterComponent] {
        &self.components
    }
}

/// Master index value with the terms it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MasterIndex {
    pub value: f64,
    /// `(∏ max(βᵢ·ωᵢ·100, floor))^(1/n)`.
    pub geomean: f64,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

/// `γ = (geomean − min β) / ((max β − min β) · 10⁻²)`.
///
/// The geometric mean runs over the percentage-scaled weighted values while
/// the range uses the raw values, so γ is only comparable with itself across
/// days.
pub fn master_index(input: &MasterIndexInput) -> Result<MasterIndex> {
    let n = input.components.len();
    if n < 2 {
        return Err(Error::invalid_argument(format!(
            "master index needs at least 2 metrics, got {n}"
        )));
    }
    let values = input.components.iter().map(|c| c.value);
    let min = values.clone().fold(f64::INFINITY, f64::min);
    let max = values.fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return Err(Error::DegenerateRange(min));
    }
    // Sorted so the product is independent of metric order.
    let mut factors: Vec<f64> = input
        .components
        .iter()
        .map(|c| (c.value * c.weight * 100.0).max(FACTOR_FLOOR))
        .collect();
    factors.sort_by(f64::total_cmp);
    let geomean = factors.iter().product::<f64>().powf(1.0 / n as f64);
    Ok(MasterIndex {
        value: (geomean - min) / ((max - min) * 1e-2),
        geomean,
        min,
        max,
        n,
    })
}

#[derive(Debug, Clone)]
pub struct MasterConfig {
    pub family: IndexFamily,
    pub registry: MetricRegistry,
    pub exclusions: BTreeSet<MetricId>,
    pub epsilon: f64,
}

impl MasterConfig {
    pub fn new(family: IndexFamily) -> Self {
        Self {
            family,
            registry: MetricRegistry::default(),
            exclusions: BTreeSet::new(),
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn excluding(mut self, metrics: impl IntoIterator<Item = MetricId>) -> Self {
        self.exclusions.extend(metrics);
        self
    }

    pub fn metrics(&self) -> Vec<MetricId> {
        self.registry
            .master_metrics()
            .filter(|m| !self.exclusions.contains(m))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MasterDay {
    pub date: NaiveDate,
    pub index: Option<MasterIndex>,
    /// Included metrics without a usable reading that day; weights were
    /// renormalized over the rest.
    pub missing: Vec<MetricId>,
    /// Why `index` is absent.
    pub note: Option<String>,
}

impl MasterDay {
    pub fn flagged(&self) -> bool {
        !self.missing.is_empty() || self.index.is_none()
    }

    pub fn value(&self) -> Option<f64> {
        self.index.map(|i| i.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MasterSeries {
    pub family: IndexFamily,
    pub range: (NaiveDate, NaiveDate),
    pub metrics: Vec<MetricId>,
    pub days: Vec<MasterDay>,
}

/// Master index for every day of `range`.
pub fn master_series(
    store: &impl SnapshotLookup,
    config: &MasterConfig,
    range: DateRange,
) -> Result<MasterSeries> {
    AtkinsonParams::new(config.epsilon)?;
    let metrics = config.metrics();
    if metrics.len() < 2 {
        return Err(Error::invalid_argument(
            "master index needs at least 2 included metrics",
        ));
    }
    let any_data = range
        .days()
        .any(|day| metrics.iter().any(|&m| store.snapshot(day, m).is_some()));
    if !any_data {
        return Err(Error::InsufficientData(format!("no snapshots stored in {range}")));
    }

    let mut days = Vec::with_capacity(range.len_days());
    for date in range.days() {
        let mut values = Vec::with_capacity(metrics.len());
        let mut missing = Vec::new();
        for &metric in &metrics {
            let reading = store
                .snapshot(date, metric)
                .and_then(|s| s.distribution())
                .and_then(|d| daily_indices(metric, d, config.epsilon).ok())
                .and_then(|ix| ix.value(config.family));
            match reading {
                Some(v) => values.push((metric, v)),
                None => missing.push(metric),
            }
        }
        let (index, note) = if values.len() < 2 {
            (None, Some(format!("{} metric(s) available", values.len())))
        } else {
            let input =
                MasterIndexInput::from_values(date, config.family, &values, &config.registry)?;
            match master_index(&input) {
                Ok(ix) => (Some(ix), None),
                Err(e) => (None, Some(e.to_string())),
            }
        };
        days.push(MasterDay {
            date,
            index,
            missing,
            note,
        });
    }
    Ok(MasterSeries {
        family: config.family,
        range: (range.start, range.end),
        metrics,
        days,
    })
}

/// Supply-side figures for one measurement period, in ETH.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarEconomics {
    pub issuance: f64,
    pub burned: f64,
    pub total_supply: f64,
    pub staked: f64,
}

impl ScalarEconomics {
    pub fn new(issuance: f64, burned: f64, total_supply: f64, staked: f64) -> Result<Self> {
        for (name, v) in [
            ("issuance", issuance),
            ("burned", burned),
            ("total supply", total_supply),
            ("staked", staked),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid_argument(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        if staked > total_supply {
            return Err(Error::invalid_argument(format!(
                "staked {staked} exceeds total supply {total_supply}"
            )));
        }
        Ok(Self {
            issuance,
            burned,
            total_supply,
            staked,
        })
    }
}

/// Net issuance over the period as an annualized fraction of supply:
/// `((issuance − burned) / supply) · (365 / days)`.
pub fn effective_inflation(e: &ScalarEconomics, period_days: u32) -> Result<f64> {
    if e.total_supply <= 0.0 {
        return Err(Error::invalid_argument("total supply must be positive"));
    }
    if period_days == 0 {
        return Err(Error::invalid_argument("period must cover at least one day"));
    }
    Ok((e.issuance - e.burned) / e.total_supply * (365.0 / f64::from(period_days)))
}

pub fn staked_percentage(e: &ScalarEconomics) -> Result<f64> {
    if e.total_supply <= 0.0 {
        return Err(Error::invalid_argument("total supply must be positive"));
    }
    Ok(e.staked / e.total_supply)
}
