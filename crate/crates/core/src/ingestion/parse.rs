//! Source payload parsers.

use serde_json::{Map, Value};

use super::fetch::RawPayload;
use super::source::{Parser, SourceSpec};
use crate::distribution::{Entry, ShareDistribution};
use crate::error::{Error, Result};
use crate::snapshot::{Payload, Snapshot};
use crate::timeseries::{self, ScalarEconomics};

/// Upper bounds (exclusive) of the native-asset balance buckets, in ETH.
/// The last bucket is open-ended.
pub const BALANCE_BOUNDS: [f64; 8] = [0.01, 0.1, 1.0, 10.0, 100.0, 1e3, 1e4, 1e5];

pub const BALANCE_LABELS: [&str; 9] = [
    "<0.01",
    "0.01-0.1",
    "0.1-1",
    "1-10",
    "10-100",
    "100-1k",
    "1k-10k",
    "10k-100k",
    ">100k",
];

/// Turns a fetched payload into a validated snapshot.
pub fn parse(spec: &SourceSpec, raw: &RawPayload) -> Result<Snapshot> {
    let root: Value = serde_json::from_slice(&raw.bytes).map_err(|e| Error::Parse {
        source_id: spec.source_id.clone(),
        offset: byte_offset(&raw.bytes, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let cx = Cx { spec };
    let payload = match spec.parser {
        Parser::CountMap => Payload::Distribution(cx.count_map(&root)?),
        Parser::NodeTable => {
            let rows = cx.array(cx.field(cx.object(&root, "$")?, "nodes", "$")?, "$.nodes")?;
            Payload::Distribution(cx.rows(rows, "$.nodes", "name", "count")?)
        }
        Parser::BalanceBands => Payload::Distribution(cx.balance_bands(&root)?),
        Parser::DuneRows { label, value } => {
            let result = cx.field(cx.object(&root, "$")?, "result", "$")?;
            let rows = cx.field(cx.object(result, "$.result")?, "rows", "$.result")?;
            let rows = cx.array(rows, "$.result.rows")?;
            Payload::Distribution(cx.rows(rows, "$.result.rows", label, value)?)
        }
        Parser::MevboostSection { section } => {
            let rows = cx.field(cx.object(&root, "$")?, section, "$")?;
            let path = format!("$.{section}");
            Payload::Distribution(cx.rows(cx.array(rows, &path)?, &path, "name", "blocks")?)
        }
        Parser::ProjectTvl => {
            let rows = cx.array(cx.field(cx.object(&root, "$")?, "projects", "$")?, "$.projects")?;
            Payload::Distribution(cx.rows(rows, "$.projects", "name", "tvl_usd")?)
        }
        Parser::PeggedAssets => Payload::Distribution(cx.pegged_assets(&root)?),
        Parser::SupplyIssuance => {
            let obj = cx.object(&root, "$")?;
            let num = |k| cx.number(cx.field(obj, k, "$")?, &format!("$.{k}"));
            let period = num("period_days")?;
            if period < 1.0 || period.fract() != 0.0 || period > f64::from(u32::MAX) {
                return Err(cx.mismatch("$.period_days must be a positive whole number of days"));
            }
            let econ = ScalarEconomics::new(num("issuance_eth")?, num("burn_eth")?, num("supply_eth")?, 0.0)
                .map_err(|e| cx.mismatch(e.to_string()))?;
            let rate = timeseries::effective_inflation(&econ, period as u32)
                .map_err(|e| cx.mismatch(e.to_string()))?;
            Payload::Scalar(rate)
        }
        Parser::StakedSupply => {
            let obj = cx.object(&root, "$")?;
            let num = |k| cx.number(cx.field(obj, k, "$")?, &format!("$.{k}"));
            let econ = ScalarEconomics::new(0.0, 0.0, num("total_supply_eth")?, num("staked_eth")?)
                .map_err(|e| cx.mismatch(e.to_string()))?;
            let pct = timeseries::staked_percentage(&econ).map_err(|e| cx.mismatch(e.to_string()))?;
            Payload::Scalar(pct)
        }
    };
    let source = format!("{}:{}", raw.mode.as_str(), spec.source_id);
    Snapshot::new(raw.date, spec.metric, payload, source, raw.fetched_at)
}

/// Converts serde_json's 1-based line/column into a byte offset.
fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = bytes
        .split(|&b| b == b'\n')
        .take(line - 1)
        .map(|l| l.len() + 1)
        .sum();
    (line_start + column.saturating_sub(1)).min(bytes.len())
}

struct Cx<'a> {
    spec: &'a SourceSpec,
}

impl Cx<'_> {
    fn mismatch(&self, message: impl Into<String>) -> Error {
        Error::SchemaMismatch {
            source_id: self.spec.source_id.clone(),
            message: message.into(),
        }
    }

    fn object<'v>(&self, v: &'v Value, path: &str) -> Result<&'v Map<String, Value>> {
        v.as_object()
            .ok_or_else(|| self.mismatch(format!("{path} must be an object")))
    }

    fn array<'v>(&self, v: &'v Value, path: &str) -> Result<&'v Vec<Value>> {
        v.as_array()
            .ok_or_else(|| self.mismatch(format!("{path} must be an array")))
    }

    fn field<'v>(&self, obj: &'v Map<String, Value>, key: &str, path: &str) -> Result<&'v Value> {
        obj.get(key)
            .ok_or_else(|| self.mismatch(format!("missing field {path}.{key}")))
    }

    fn number(&self, v: &Value, path: &str) -> Result<f64> {
        let x = v
            .as_f64()
            .ok_or_else(|| self.mismatch(format!("{path} must be a number")))?;
        if x < 0.0 {
            return Err(self.mismatch(format!("{path} must be nonnegative, got {x}")));
        }
        Ok(x)
    }

    fn text<'v>(&self, v: &'v Value, path: &str) -> Result<&'v str> {
        v.as_str()
            .ok_or_else(|| self.mismatch(format!("{path} must be a string")))
    }

    fn distribution(&self, entries: Vec<Entry>) -> Result<ShareDistribution> {
        if entries.is_empty() {
            return Err(self.mismatch("payload lists no entities"));
        }
        ShareDistribution::from_entries(entries).map_err(|e| self.mismatch(e.to_string()))
    }

    fn count_map(&self, root: &Value) -> Result<ShareDistribution> {
        let obj = self.object(root, "$")?;
        let entries = obj
            .iter()
            .map(|(label, v)| {
                Ok(Entry {
                    label: label.clone(),
                    quantity: self.number(v, &format!("$.{label}"))?,
                })
            })
            .collect::<Result<_>>()?;
        self.distribution(entries)
    }

    fn rows(&self, rows: &[Value], path: &str, label: &str, value: &str) -> Result<ShareDistribution> {
        let entries = rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let at = format!("{path}[{i}]");
                let obj = self.object(row, &at)?;
                Ok(Entry {
                    label: self.text(self.field(obj, label, &at)?, &format!("{at}.{label}"))?.to_owned(),
                    quantity: self.number(self.field(obj, value, &at)?, &format!("{at}.{value}"))?,
                })
            })
            .collect::<Result<_>>()?;
        self.distribution(entries)
    }

    fn balance_bands(&self, root: &Value) -> Result<ShareDistribution> {
        let data = self.field(self.object(root, "$")?, "data", "$")?;
        let bands = self.field(self.object(data, "$.data")?, "balance_bands", "$.data")?;
        let bands = self.array(bands, "$.data.balance_bands")?;
        if bands.is_empty() {
            return Err(self.mismatch("payload lists no balance bands"));
        }
        let mut sums = [0.0; BALANCE_LABELS.len()];
        for (i, band) in bands.iter().enumerate() {
            let at = format!("$.data.balance_bands[{i}]");
            let obj = self.object(band, &at)?;
            let min = self.number(self.field(obj, "min_balance", &at)?, &format!("{at}.min_balance"))?;
            let max = match self.field(obj, "max_balance", &at)? {
                Value::Null => f64::INFINITY,
                v => self.number(v, &format!("{at}.max_balance"))?,
            };
            let supply = self.number(self.field(obj, "supply", &at)?, &format!("{at}.supply"))?;
            if max <= min {
                return Err(self.mismatch(format!("{at} has max_balance ≤ min_balance")));
            }
            let bucket = BALANCE_BOUNDS.iter().filter(|&&b| b <= min).count();
            let upper = BALANCE_BOUNDS.get(bucket).copied().unwrap_or(f64::INFINITY);
            if max > upper {
                return Err(self.mismatch(format!(
                    "{at} [{min}, {max}) spans more than one balance bucket"
                )));
            }
            sums[bucket] += supply;
        }
        self.distribution(
            BALANCE_LABELS
                .iter()
                .zip(sums)
                .map(|(l, q)| Entry {
                    label: (*l).to_owned(),
                    quantity: q,
                })
                .collect(),
        )
    }

    fn pegged_assets(&self, root: &Value) -> Result<ShareDistribution> {
        let assets = self.field(self.object(root, "$")?, "peggedAssets", "$")?;
        let assets = self.array(assets, "$.peggedAssets")?;
        let entries = assets
            .iter()
            .enumerate()
            .map(|(i, asset)| {
                let at = format!("$.peggedAssets[{i}]");
                let obj = self.object(asset, &at)?;
                let symbol = self.text(self.field(obj, "symbol", &at)?, &format!("{at}.symbol"))?;
                let chains = self.object(
                    self.field(obj, "chainCirculating", &at)?,
                    &format!("{at}.chainCirculating"),
                )?;
                // Assets with no Ethereum circulation hold a zero share.
                let quantity = match chains.get("Ethereum") {
                    None => 0.0,
                    Some(eth) => {
                        let p = format!("{at}.chainCirculating.Ethereum");
                        let current = self.field(self.object(eth, &p)?, "current", &p)?;
                        let p = format!("{p}.current");
                        let usd = self.field(self.object(current, &p)?, "peggedUSD", &p)?;
                        self.number(usd, &format!("{p}.peggedUSD"))?
                    }
                };
                Ok(Entry {
                    label: symbol.to_owned(),
                    quantity,
                })
            })
            .collect::<Result<_>>()?;
        self.distribution(entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingestion::fetch::FetchMode;
    use crate::ingestion::source::{default_sources, scalar_sources};
    use crate::metric::MetricId;
    use chrono::{NaiveDate, TimeZone, Utc};

    fn spec(metric: MetricId) -> SourceSpec {
        default_sources()
            .into_iter()
            .chain(scalar_sources())
            .find(|s| s.metric == metric)
            .unwrap()
    }

    fn raw(spec: &SourceSpec, body: &str) -> RawPayload {
        let date = NaiveDate::from_ymd_opt(2023, 5, 23).unwrap();
        RawPayload {
            source_id: spec.source_id.clone(),
            date,
            bytes: body.as_bytes().to_vec(),
            fetched_at: Utc.with_ymd_and_hms(2023, 5, 23, 0, 0, 0).unwrap(),
            mode: FetchMode::Fixture,
            origin: "inline".into(),
        }
    }

    fn parse_str(metric: MetricId, body: &str) -> Result<Snapshot> {
        let s = spec(metric);
        parse(&s, &raw(&s, body))
    }

    #[test]
    fn client_distribution_payload() {
        let snap = parse_str(
            MetricId::ConsensusNodesByClient,
            r#"{"lighthouse": 3400, "prysm": 2900, "teku": 1200, "grandine": 0}"#,
        )
        .unwrap();
        let expected = ShareDistribution::new([
            ("grandine", 0.0),
            ("lighthouse", 3400.0),
            ("prysm", 2900.0),
            ("teku", 1200.0),
        ])
        .unwrap();
        assert_eq!(snap.distribution(), Some(&expected));
        assert_eq!(snap.source(), "fixture:migalabs-client-distribution");
        assert_eq!(snap.metric(), MetricId::ConsensusNodesByClient);
    }

    #[test]
    fn empty_object_is_schema_mismatch() {
        for m in MetricId::ALL {
            let err = parse_str(m, "{}").unwrap_err();
            assert!(matches!(err, Error::SchemaMismatch { .. }), "{m}: {err}");
        }
    }

    #[test]
    fn malformed_json_reports_offset() {
        let body = "{\"a\": 1,\n \"b\": oops}";
        let err = parse_str(MetricId::ConsensusNodesByCountry, body).unwrap_err();
        match err {
            Error::Parse { source_id, offset, .. } => {
                assert_eq!(source_id, "migalabs-geo-distribution");
                assert_eq!(&body[offset..offset + 1], "o");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn dune_rows_and_missing_columns() {
        let body = r#"{"execution_id":"x","result":{"rows":[
            {"entity":"Lido","amount_staked":7400000.5},
            {"entity":"Solo Stakers","amount_staked":6900000}]}}"#;
        let snap = parse_str(MetricId::StakedByPool, body).unwrap();
        assert_eq!(snap.distribution().unwrap().get("Lido"), Some(7400000.5));

        let drift = r#"{"result":{"rows":[{"entity":"Lido","staked":1}]}}"#;
        let err = parse_str(MetricId::StakedByPool, drift).unwrap_err();
        assert!(err.to_string().contains("amount_staked"), "{err}");
    }

    #[test]
    fn zero_share_entity_retained() {
        let body = r#"{"builders":[{"name":"a","blocks":10},{"name":"b","blocks":0}],"relays":[]}"#;
        let snap = parse_str(MetricId::BlocksByBuilder, body).unwrap();
        assert_eq!(snap.distribution().unwrap().len(), 2);
        assert_eq!(snap.distribution().unwrap().get("b"), Some(0.0));
        // empty relay section is not a distribution
        assert!(parse_str(MetricId::BlocksByRelay, body).is_err());
    }

    #[test]
    fn balance_bands_bucketed() {
        let body = r#"{"data":{"balance_bands":[
            {"min_balance":0,"max_balance":0.001,"supply":1.5},
            {"min_balance":0.001,"max_balance":0.01,"supply":2.5},
            {"min_balance":1,"max_balance":10,"supply":40},
            {"min_balance":100000,"max_balance":null,"supply":900}]}}"#;
        let snap = parse_str(MetricId::NativeAssetDistribution, body).unwrap();
        let d = snap.distribution().unwrap();
        assert_eq!(d.len(), 9);
        assert_eq!(d.get("<0.01"), Some(4.0));
        assert_eq!(d.get("1-10"), Some(40.0));
        assert_eq!(d.get(">100k"), Some(900.0));
        assert_eq!(d.get("10-100"), Some(0.0));

        let spanning = r#"{"data":{"balance_bands":[{"min_balance":0.5,"max_balance":5,"supply":1}]}}"#;
        assert!(matches!(
            parse_str(MetricId::NativeAssetDistribution, spanning),
            Err(Error::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn stablecoins_without_ethereum_are_zero() {
        let body = r#"{"peggedAssets":[
            {"symbol":"USDT","chainCirculating":{"Ethereum":{"current":{"peggedUSD":3.9e10}}}},
            {"symbol":"XUSD","chainCirculating":{"Tron":{"current":{"peggedUSD":5}}}}]}"#;
        let snap = parse_str(MetricId::StablecoinsByTvl, body).unwrap();
        assert_eq!(snap.distribution().unwrap().get("XUSD"), Some(0.0));
    }

    #[test]
    fn scalar_payloads() {
        let body = r#"{"issuance_eth":0,"burn_eth":1128000,"supply_eth":120000000,"period_days":365}"#;
        let snap = parse_str(MetricId::EffectiveInflationRate, body).unwrap();
        assert!((snap.scalar().unwrap() - -0.0094).abs() < 1e-12);

        let body = r#"{"staked_eth":24932109,"total_supply_eth":120218472}"#;
        let snap = parse_str(MetricId::StakedSupplyPercentage, body).unwrap();
        assert!((snap.scalar().unwrap() - 0.2074).abs() < 1e-4);

        let bad = r#"{"staked_eth":2,"total_supply_eth":1}"#;
        assert!(parse_str(MetricId::StakedSupplyPercentage, bad).is_err());
    }
}
