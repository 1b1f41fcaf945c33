//! Concentration-of-control analytics for Ethereum.
//!
//! The crate measures how evenly control is spread across twelve dimensions
//! of the network (client and geographic node diversity, stake, block
//! building, account abstraction infrastructure, rollups and stablecoins)
//! using a family of inequality and diversity indices, tracks the readings
//! day by day in an append-only snapshot store, and renders tables and charts.
//!
//! Layout:
//!
//! * [`distribution`], [`metric`], [`snapshot`], [`synth`]: the domain model.
//! * [`indices`]: Gini, HHI, Shannon, Atkinson, tail ratios, KL and JSD.
//! * [`timeseries`]: interval divergence, master index, scalar economics.
//! * [`ingestion`]: source catalog, fetching, parsing and the store.
//! * [`report`]: averages and divergence tables, CSV/SVG/terminal emission.
//! * [`cli`]: the `ethconc` command line.

pub mod cli;
pub mod distribution;
pub mod error;
pub mod indices;
pub mod ingestion;
pub mod metric;
pub mod report;
pub mod snapshot;
pub mod synth;
pub mod timeseries;

pub use distribution::{align, Entry, ShareDistribution};
pub use error::{Error, Result};
pub use metric::{MetricId, MetricKind, MetricRegistry};
pub use snapshot::{DateRange, MemoryStore, Payload, Snapshot, SnapshotLookup};
