use serde::Serialize;

use crate::metric::MetricId;

/// How a source's JSON payload is turned into a snapshot. The expected
/// shapes are frozen in the fixture corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parser {
    /// `{"<label>": <count>, ...}`
    CountMap,
    /// `{"nodes": [{"name": .., "count": ..}, ...]}`
    NodeTable,
    /// `{"data": {"balance_bands": [{"min_balance", "max_balance", "supply"}]}}`,
    /// re-bucketed into powers-of-ten balance ranges.
    BalanceBands,
    /// Dune API results: `{"result": {"rows": [{<label>: .., <value>: ..}]}}`.
    DuneRows {
        label: &'static str,
        value: &'static str,
    },
    /// `{"builders": [{"name", "blocks"}], "relays": [...]}`, one section.
    MevboostSection { section: &'static str },
    /// `{"projects": [{"name", "tvl_usd"}]}`
    ProjectTvl,
    /// `{"peggedAssets": [{"symbol", "chainCirculating": {"Ethereum": {"current": {"peggedUSD"}}}}]}`
    PeggedAssets,
    /// `{"issuance_eth", "burn_eth", "supply_eth", "period_days"}` to an
    /// annualized effective inflation rate.
    SupplyIssuance,
    /// `{"staked_eth", "total_supply_eth"}` to the staked fraction.
    StakedSupply,
}

impl Parser {
    pub fn id(&self) -> &'static str {
        match self {
            Parser::CountMap => "count-map",
            Parser::NodeTable => "node-table",
            Parser::BalanceBands => "balance-bands",
            Parser::DuneRows { .. } => "dune-rows",
            Parser::MevboostSection { .. } => "mevboost-section",
            Parser::ProjectTvl => "project-tvl",
            Parser::PeggedAssets => "pegged-assets",
            Parser::SupplyIssuance => "supply-issuance",
            Parser::StakedSupply => "staked-supply",
        }
    }
}

/// One upstream data source, polled once per day.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceSpec {
    pub source_id: String,
    pub metric: MetricId,
    pub endpoint: String,
    pub parser: Parser,
    /// Dune endpoints need `DUNE_API_KEY`.
    pub requires_dune_key: bool,
}

impl SourceSpec {
    fn new(source_id: &str, metric: MetricId, endpoint: &str, parser: Parser) -> Self {
        Self {
            source_id: source_id.to_owned(),
            metric,
            endpoint: endpoint.to_owned(),
            parser,
            requires_dune_key: endpoint.starts_with("https://api.dune.com/"),
        }
    }
}

/// One source per distribution metric.
pub fn default_sources() -> Vec<SourceSpec> {
    use MetricId::*;
    vec![
        SourceSpec::new(
            "migalabs-client-distribution",
            ConsensusNodesByClient,
            "https://migalabs.es/api/v1/client-distribution",
            Parser::CountMap,
        ),
        SourceSpec::new(
            "migalabs-geo-distribution",
            ConsensusNodesByCountry,
            "https://migalabs.es/api/v1/geo-distribution",
            Parser::CountMap,
        ),
        SourceSpec::new(
            "ethernodes-clients",
            ExecutionNodesByClient,
            "https://www.ethernodes.org/",
            Parser::NodeTable,
        ),
        SourceSpec::new(
            "ethernodes-countries",
            ExecutionNodesByCountry,
            "https://www.ethernodes.org/countries",
            Parser::NodeTable,
        ),
        SourceSpec::new(
            "messari-eth-supply-distribution",
            NativeAssetDistribution,
            "https://data.messari.io/api/v1/assets/ethereum/metrics",
            Parser::BalanceBands,
        ),
        SourceSpec::new(
            "dune-staked-by-pool",
            StakedByPool,
            "https://api.dune.com/api/v1/query/2394100/results",
            Parser::DuneRows {
                label: "entity",
                value: "amount_staked",
            },
        ),
        SourceSpec::new(
            "mevboost-pics-builders",
            BlocksByBuilder,
            "https://mevboost.pics/data.html",
            Parser::MevboostSection { section: "builders" },
        ),
        SourceSpec::new(
            "mevboost-pics-relays",
            BlocksByRelay,
            "https://mevboost.pics/data.html",
            Parser::MevboostSection { section: "relays" },
        ),
        SourceSpec::new(
            "dune-userops-by-bundler",
            UseropsByBundler,
            "https://api.dune.com/api/v1/query/2193933/results",
            Parser::DuneRows {
                label: "bundler",
                value: "num_userops",
            },
        ),
        SourceSpec::new(
            "dune-wallets-by-deployer",
            WalletsByDeployer,
            "https://api.dune.com/api/v1/query/2434102/results",
            Parser::DuneRows {
                label: "deployer",
                value: "num_wallets",
            },
        ),
        SourceSpec::new(
            "l2beat-tvl",
            RollupsByTvl,
            "https://l2beat.com/scaling/tvl",
            Parser::ProjectTvl,
        ),
        SourceSpec::new(
            "llama-stablecoins",
            StablecoinsByTvl,
            "https://stablecoins.llama.fi/stablecoins",
            Parser::PeggedAssets,
        ),
    ]
}

/// Sources for the two scalar metrics.
pub fn scalar_sources() -> Vec<SourceSpec> {
    vec![
        SourceSpec::new(
            "ultrasound-supply",
            MetricId::EffectiveInflationRate,
            "https://ultrasound.money/api/v2/fees/supply-over-time",
            Parser::SupplyIssuance,
        ),
        SourceSpec::new(
            "beaconchain-staked",
            MetricId::StakedSupplyPercentage,
            "https://beaconcha.in/api/v1/epoch/latest",
            Parser::StakedSupply,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn every_distribution_metric_has_a_source() {
        let covered: BTreeSet<_> = default_sources().iter().map(|s| s.metric).collect();
        let expected: BTreeSet<_> = MetricId::distributions().collect();
        assert_eq!(covered, expected);
        let ids: BTreeSet<_> = default_sources()
            .into_iter()
            .chain(scalar_sources())
            .map(|s| s.source_id)
            .collect();
        assert_eq!(ids.len(), 14);
    }

    #[test]
    fn dune_sources_need_a_key() {
        let keyed: Vec<_> = default_sources()
            .into_iter()
            .filter(|s| s.requires_dune_key)
            .map(|s| s.metric)
            .collect();
        assert_eq!(
            keyed,
            [
                MetricId::StakedByPool,
                MetricId::UseropsByBundler,
                MetricId::WalletsByDeployer
            ]
        );
    }
}
