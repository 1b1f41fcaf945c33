//! The twelve distribution metrics, the two scalar metrics and their weights.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier for one measured dimension.
///
/// Declaration order is the canonical report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricId {
    ConsensusNodesByClient,
    ConsensusNodesByCountry,
    ExecutionNodesByClient,
    ExecutionNodesByCountry,
    NativeAssetDistribution,
    StakedByPool,
    BlocksByBuilder,
    BlocksByRelay,
    UseropsByBundler,
    WalletsByDeployer,
    RollupsByTvl,
    StablecoinsByTvl,
    EffectiveInflationRate,
    StakedSupplyPercentage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    Distribution,
    Scalar,
}

impl MetricId {
    pub const ALL: [MetricId; 14] = [
        MetricId::ConsensusNodesByClient,
        MetricId::ConsensusNodesByCountry,
        MetricId::ExecutionNodesByClient,
        MetricId::ExecutionNodesByCountry,
        MetricId::NativeAssetDistribution,
        MetricId::StakedByPool,
        MetricId::BlocksByBuilder,
        MetricId::BlocksByRelay,
        MetricId::UseropsByBundler,
        MetricId::WalletsByDeployer,
        MetricId::RollupsByTvl,
        MetricId::StablecoinsByTvl,
        MetricId::EffectiveInflationRate,
        MetricId::StakedSupplyPercentage,
    ];

    /// The metrics whose payload is a [`crate::ShareDistribution`].
    pub fn distributions() -> impl Iterator<Item = MetricId> {
        Self::ALL.into_iter().filter(|m| m.is_distribution())
    }

    /// The account-abstraction metrics, commonly excluded from master indices
    /// because their data is sparse.
    pub const ACCOUNT_ABSTRACTION: [MetricId; 2] =
        [MetricId::UseropsByBundler, MetricId::WalletsByDeployer];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricId::ConsensusNodesByClient => "consensus-nodes-by-client",
            MetricId::ConsensusNodesByCountry => "consensus-nodes-by-country",
            MetricId::ExecutionNodesByClient => "execution-nodes-by-client",
            MetricId::ExecutionNodesByCountry => "execution-nodes-by-country",
            MetricId::NativeAssetDistribution => "native-asset-distribution",
            MetricId::StakedByPool => "staked-by-pool",
            MetricId::BlocksByBuilder => "blocks-by-builder",
            MetricId::BlocksByRelay => "blocks-by-relay",
            MetricId::UseropsByBundler => "userops-by-bundler",
            MetricId::WalletsByDeployer => "wallets-by-deployer",
            MetricId::RollupsByTvl => "rollups-by-tvl",
            MetricId::StablecoinsByTvl => "stablecoins-by-tvl",
            MetricId::EffectiveInflationRate => "effective-inflation-rate",
            MetricId::StakedSupplyPercentage => "staked-supply-percentage",
        }
    }

    /// Human-readable name used in table rows.
    pub fn title(self) -> &'static str {
        match self {
            MetricId::ConsensusNodesByClient => "Consensus Nodes by Client",
            MetricId::ConsensusNodesByCountry => "Consensus Nodes by Country",
            MetricId::ExecutionNodesByClient => "Execution Nodes by Client",
            MetricId::ExecutionNodesByCountry => "Execution Nodes by Country",
            MetricId::NativeAssetDistribution => "Native Asset by Amount",
            MetricId::StakedByPool => "Amount Staked by Pool",
            MetricId::BlocksByBuilder => "Blocks by Builder",
            MetricId::BlocksByRelay => "Blocks by Relay",
            MetricId::UseropsByBundler => "User Operations by Bundler",
            MetricId::WalletsByDeployer => "Wallets by Deployer",
            MetricId::RollupsByTvl => "Rollups by TVL",
            MetricId::StablecoinsByTvl => "Stablecoins by TVL",
            MetricId::EffectiveInflationRate => "Effective Inflation Rate",
            MetricId::StakedSupplyPercentage => "Percentage of Supply Staked",
        }
    }

    pub fn kind(self) -> MetricKind {
        match self {
            MetricId::EffectiveInflationRate | MetricId::StakedSupplyPercentage => {
                MetricKind::Scalar
            }
            _ => MetricKind::Distribution,
        }
    }

    pub fn is_distribution(self) -> bool {
        self.kind() == MetricKind::Distribution
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid_argument(format!("unknown metric `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSpec {
    pub weight: f64,
    pub kind: MetricKind,
    pub in_master_index: bool,
}

/// Per-metric weight and master-index eligibility.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRegistry {
    specs: BTreeMap<MetricId, MetricSpec>,
}

impl Default for MetricRegistry {
    fn default() -> Self {
        let specs = MetricId::ALL
            .into_iter()
            .map(|m| {
                let weight = match m {
                    MetricId::BlocksByBuilder | MetricId::BlocksByRelay => 0.7,
                    MetricId::UseropsByBundler | MetricId::WalletsByDeployer => 0.2,
                    MetricId::RollupsByTvl => 0.5,
                    MetricId::StablecoinsByTvl => 0.3,
                    MetricId::EffectiveInflationRate | MetricId::StakedSupplyPercentage => 0.0,
                    _ => 1.0,
                };
                let spec = MetricSpec {
                    weight,
                    kind: m.kind(),
                    in_master_index: m.is_distribution(),
                };
                (m, spec)
            })
            .collect();
        Self { specs }
    }
}

impl MetricRegistry {
    pub fn spec(&self, metric: MetricId) -> MetricSpec {
        self.specs[&metric]
    }

    pub fn weight(&self, metric: MetricId) -> f64 {
        self.spec(metric).weight
    }

    /// Metrics that take part in master indices, in canonical order.
    pub fn master_metrics(&self) -> impl Iterator<Item = MetricId> + '_ {
        self.specs
            .iter()
            .filter(|(_, s)| s.in_master_index)
            .map(|(&m, _)| m)
    }

    pub fn set_weight(&mut self, metric: MetricId, weight: f64) -> Result<()> {
        if !metric.is_distribution() {
            return Err(Error::invalid_argument(format!(
                "`{metric}` is a scalar metric and carries no weight"
            )));
        }
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(Error::invalid_argument(format!(
                "weight for `{metric}` must be nonnegative, got {weight}"
            )));
        }
        self.specs.get_mut(&metric).expect("all metrics present").weight = weight;
        Ok(())
    }

    /// Applies `metric-id -> weight` overrides.
    pub fn with_overrides<'a, I>(mut self, overrides: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        for (name, weight) in overrides {
            self.set_weight(name.parse()?, weight)?;
        }
        Ok(self)
    }

    /// `ω_i / Σω` over the given metrics, in the order given.
    pub fn normalized_weights(&self, metrics: &[MetricId]) -> Result<Vec<f64>> {
        let total: f64 = metrics.iter().map(|&m| self.weight(m)).sum();
        if total <= 0.0 {
            return Err(Error::invalid_argument(
                "selected metrics have zero total weight",
            ));
        }
        Ok(metrics.iter().map(|&m| self.weight(m) / total).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_distributions_two_scalars() {
        assert_eq!(MetricId::distributions().count(), 12);
        let scalars: Vec<_> = MetricId::ALL
            .into_iter()
            .filter(|m| m.kind() == MetricKind::Scalar)
            .collect();
        assert_eq!(
            scalars,
            [MetricId::EffectiveInflationRate, MetricId::StakedSupplyPercentage]
        );
    }

    #[test]
    fn default_weights() {
        let r = MetricRegistry::default();
        let expected = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.7, 0.7, 0.2, 0.2, 0.5, 0.3];
        let got: Vec<_> = MetricId::distributions().map(|m| r.weight(m)).collect();
        assert_eq!(got, expected);
        assert!(!r.spec(MetricId::EffectiveInflationRate).in_master_index);
        assert!(!r.spec(MetricId::StakedSupplyPercentage).in_master_index);
        assert_eq!(r.master_metrics().count(), 12);

        let all: Vec<_> = r.master_metrics().collect();
        let sum: f64 = r.normalized_weights(&all).unwrap().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn names_round_trip() {
        for m in MetricId::ALL {
            assert_eq!(m.as_str().parse::<MetricId>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.as_str()));
        }
        assert!("nodes".parse::<MetricId>().is_err());
    }

    #[test]
    fn overrides_validate() {
        let r = MetricRegistry::default()
            .with_overrides([("blocks-by-builder", 0.5)])
            .unwrap();
        assert_eq!(r.weight(MetricId::BlocksByBuilder), 0.5);
        assert!(MetricRegistry::default()
            .with_overrides([("no-such-metric", 1.0)])
            .is_err());
        assert!(MetricRegistry::default()
            .with_overrides([("effective-inflation-rate", 1.0)])
            .is_err());
        assert!(MetricRegistry::default()
            .with_overrides([("rollups-by-tvl", -1.0)])
            .is_err());
    }
}
