//! Synthetic fixture corpus.
//!
//! Produces one payload per source per day in the exact shapes the parsers
//! expect. Shares drift linearly between a start and end weight with a little
//! seeded noise, and a few entities appear part way through the window. Only
//! arithmetic and rounding are used, so the bytes do not depend on the
//! platform's math library.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use super::fetch::fixture_path;
use super::source::{default_sources, scalar_sources, Parser, SourceSpec};
use crate::error::{Error, Result};

pub const DEFAULT_START: &str = "2023-05-23";
pub const DEFAULT_DAYS: u32 = 90;
pub const DEFAULT_SEED: u64 = 2023;

/// One entity's trajectory: weight on the first day, weight on the last
/// day, and the first day it exists (earlier days report zero).
struct Track {
    label: &'static str,
    from: f64,
    to: f64,
    appears: u32,
}

const fn t(label: &'static str, from: f64, to: f64) -> Track {
    Track { label, from, to, appears: 0 }
}

const fn late(label: &'static str, from: f64, to: f64, appears: u32) -> Track {
    Track { label, from, to, appears }
}

struct Profile {
    total: f64,
    /// Relative half-width of the daily noise.
    noise: f64,
    tracks: Vec<Track>,
}

fn profile(source_id: &str) -> Option<Profile> {
    let p = match source_id {
        "migalabs-client-distribution" => Profile {
            total: 9400.0,
            noise: 0.02,
            tracks: vec![
                t("prysm", 38.0, 36.0),
                t("lighthouse", 34.0, 35.0),
                t("teku", 17.0, 17.5),
                t("nimbus", 8.0, 8.5),
                t("lodestar", 1.5, 2.0),
                t("grandine", 0.3, 0.4),
                t("other", 1.2, 0.6),
            ],
        },
        "migalabs-geo-distribution" => Profile {
            total: 9400.0,
            noise: 0.03,
            tracks: vec![
                t("United States", 44.0, 43.0),
                t("Germany", 15.0, 15.5),
                t("France", 5.0, 5.2),
                t("United Kingdom", 4.5, 4.3),
                t("Singapore", 4.0, 4.2),
                t("Canada", 3.2, 3.1),
                t("Japan", 3.0, 3.1),
                t("Netherlands", 2.8, 2.9),
                t("Finland", 2.5, 2.6),
                t("Australia", 1.8, 1.8),
                t("South Korea", 1.6, 1.7),
                t("Switzerland", 1.4, 1.4),
                t("Other", 11.2, 11.2),
            ],
        },
        "ethernodes-clients" => Profile {
            total: 6200.0,
            noise: 0.03,
            tracks: vec![
                t("geth", 58.0, 54.0),
                t("nethermind", 22.0, 25.0),
                t("erigon", 9.0, 9.5),
                t("besu", 9.0, 8.5),
                late("reth", 0.4, 1.5, 20),
                t("akula", 0.0, 0.0),
                t("other", 1.6, 1.0),
            ],
        },
        "ethernodes-countries" => Profile {
            total: 6200.0,
            noise: 0.03,
            tracks: vec![
                t("United States", 37.0, 36.0),
                t("Germany", 13.0, 13.5),
                t("China", 5.0, 4.6),
                t("Finland", 4.0, 4.1),
                t("France", 3.8, 3.9),
                t("Netherlands", 3.5, 3.5),
                t("United Kingdom", 3.4, 3.4),
                t("Canada", 3.1, 3.0),
                t("Singapore", 3.0, 3.2),
                t("Russia", 2.5, 2.2),
                t("Japan", 2.2, 2.3),
                t("Other", 19.5, 20.3),
            ],
        },
        "messari-eth-supply-distribution" => Profile {
            total: 120_200_000.0,
            noise: 0.004,
            tracks: vec![
                t("<0.01", 0.01, 0.01),
                t("0.01-0.1", 0.3, 0.3),
                t("0.1-1", 1.8, 1.8),
                t("1-10", 5.5, 5.4),
                t("10-100", 8.2, 8.1),
                t("100-1k", 9.6, 9.5),
                t("1k-10k", 13.4, 13.3),
                t("10k-100k", 17.0, 17.2),
                t(">100k", 44.2, 44.4),
            ],
        },
        "dune-staked-by-pool" => Profile {
            total: 24_000_000.0,
            noise: 0.004,
            tracks: vec![
                t("Lido", 31.5, 32.4),
                t("Coinbase", 9.5, 9.0),
                t("Binance", 4.8, 4.5),
                t("Kraken", 4.4, 3.9),
                t("Rocket Pool", 2.7, 3.1),
                t("Figment", 2.1, 2.2),
                t("Bitcoin Suisse", 1.4, 1.4),
                t("Staked.us", 1.3, 1.3),
                t("Stakefish", 1.2, 1.1),
                t("Frax Finance", 0.3, 0.6),
                t("Unidentified", 40.8, 40.5),
            ],
        },
        "mevboost-pics-builders" => Profile {
            total: 6400.0,
            noise: 0.05,
            tracks: vec![
                t("beaverbuild", 18.0, 33.0),
                t("rsync-builder", 16.0, 18.0),
                t("flashbots", 24.0, 8.0),
                t("builder0x69", 14.0, 7.0),
                late("titanbuilder", 1.0, 12.0, 10),
                t("bloXroute", 7.0, 6.0),
                t("eden", 5.0, 2.0),
                t("manifold", 4.0, 1.0),
                t("buildai", 2.0, 2.0),
                t("blocknative", 5.0, 0.0),
                t("other", 4.0, 5.0),
            ],
        },
        "mevboost-pics-relays" => Profile {
            total: 6400.0,
            noise: 0.05,
            tracks: vec![
                t("flashbots", 46.0, 28.0),
                t("ultra sound", 18.0, 30.0),
                t("bloXroute max profit", 14.0, 16.0),
                t("bloXroute regulated", 6.0, 6.0),
                t("agnostic", 8.0, 12.0),
                t("aestus", 1.0, 3.0),
                t("manifold", 3.0, 1.0),
                t("eden", 4.0, 4.0),
            ],
        },
        "dune-userops-by-bundler" => Profile {
            total: 120_000.0,
            noise: 0.08,
            tracks: vec![
                t("stackup", 76.0, 48.0),
                t("alchemy", 9.0, 18.0),
                t("biconomy", 8.0, 12.0),
                late("pimlico", 1.0, 15.0, 30),
                t("candide", 3.0, 4.0),
                t("etherspot", 2.0, 2.0),
                t("unknown", 1.0, 1.0),
            ],
        },
        "dune-wallets-by-deployer" => Profile {
            total: 40_000.0,
            noise: 0.08,
            tracks: vec![
                t("safe", 34.0, 30.0),
                t("biconomy", 22.0, 24.0),
                t("zerodev", 12.0, 15.0),
                t("alchemy", 10.0, 12.0),
                t("candide", 4.0, 3.0),
                t("argent", 8.0, 7.0),
                t("ambire", 6.0, 5.0),
                t("unknown", 4.0, 4.0),
            ],
        },
        "l2beat-tvl" => Profile {
            total: 9_800_000_000.0,
            noise: 0.02,
            tracks: vec![
                t("Arbitrum One", 59.0, 54.0),
                t("OP Mainnet", 26.0, 24.0),
                t("dYdX", 4.5, 3.5),
                t("zkSync Era", 5.5, 7.0),
                t("StarkNet", 1.5, 1.6),
                t("Polygon zkEVM", 0.3, 0.5),
                late("Linea", 0.1, 0.8, 55),
                late("Base", 0.5, 4.0, 78),
                t("Loopring", 1.4, 1.2),
                t("Metis", 1.2, 1.0),
            ],
        },
        "llama-stablecoins" => Profile {
            total: 70_000_000_000.0,
            noise: 0.005,
            tracks: vec![
                t("USDT", 52.0, 53.0),
                t("USDC", 34.0, 33.0),
                t("DAI", 7.0, 7.2),
                t("BUSD", 3.0, 1.8),
                t("FRAX", 1.1, 1.1),
                t("TUSD", 1.2, 2.0),
                t("USDP", 0.7, 0.6),
                t("LUSD", 0.4, 0.4),
                t("GUSD", 0.5, 0.4),
            ],
        },
        _ => return None,
    };
    Some(p)
}

/// A generated fixture file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureFile {
    pub source_id: String,
    pub date: NaiveDate,
    pub body: String,
}

impl FixtureFile {
    pub fn path(&self, dir: &Path) -> PathBuf {
        fixture_path(dir, &self.source_id, self.date)
    }
}

/// Per-source RNG stream so adding a source does not perturb the others.
fn stream(seed: u64, source_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(source_index as u64 + 1);
    rng
}

/// Rounds to `1/scale`, giving the double nearest the decimal value.
fn round_to(x: f64, scale: f64) -> f64 {
    (x * scale).round() / scale
}

fn quantities(p: &Profile, day: u32, days: u32, rng: &mut ChaCha8Rng) -> Vec<(&'static str, f64)> {
    let span = f64::from(days.saturating_sub(1).max(1));
    let frac = f64::from(day) / span;
    let raw: Vec<f64> = p
        .tracks
        .iter()
        .map(|tr| {
            let jitter = 1.0 + p.noise * (2.0 * rng.random::<f64>() - 1.0);
            if day < tr.appears {
                0.0
            } else {
                (tr.from + (tr.to - tr.from) * frac) * jitter
            }
        })
        .collect();
    let sum: f64 = raw.iter().sum();
    p.tracks
        .iter()
        .zip(raw)
        .map(|(tr, w)| (tr.label, p.total * w / sum))
        .collect()
}

fn count(x: f64) -> Value {
    json!(x.round() as u64)
}

fn distribution_body(spec: &SourceSpec, q: &[(&'static str, f64)]) -> Value {
    match spec.parser {
        Parser::CountMap => Value::Object(q.iter().map(|(l, x)| ((*l).to_owned(), count(*x))).collect()),
        Parser::NodeTable => json!({
            "nodes": q.iter().map(|(l, x)| json!({"name": l, "count": count(*x)})).collect::<Vec<_>>(),
        }),
        Parser::BalanceBands => {
            let bounds = [0.0, 0.01, 0.1, 1.0, 10.0, 100.0, 1e3, 1e4, 1e5];
            let bands: Vec<Value> = q
                .iter()
                .enumerate()
                .map(|(i, (_, x))| {
                    let max = bounds.get(i + 1).map_or(Value::Null, |b| json!(b));
                    json!({"min_balance": bounds[i], "max_balance": max, "supply": round_to(*x, 100.0)})
                })
                .collect();
            json!({"data": {"balance_bands": bands}})
        }
        Parser::DuneRows { label, value } => {
            let rows: Vec<Value> = q
                .iter()
                .map(|(l, x)| {
                    let mut row = Map::new();
                    row.insert(label.to_owned(), json!(l));
                    row.insert(value.to_owned(), count(*x));
                    Value::Object(row)
                })
                .collect();
            json!({"execution_id": "corpus", "result": {"rows": rows}})
        }
        Parser::MevboostSection { section } => {
            let rows: Vec<Value> = q.iter().map(|(l, x)| json!({"name": l, "blocks": count(*x)})).collect();
            let mut obj = Map::new();
            obj.insert(section.to_owned(), Value::Array(rows));
            Value::Object(obj)
        }
        Parser::ProjectTvl => json!({
            "projects": q
                .iter()
                .map(|(l, x)| json!({"name": l, "tvl_usd": round_to(*x, 100.0)}))
                .collect::<Vec<_>>(),
        }),
        Parser::PeggedAssets => {
            let mut assets: Vec<Value> = q
                .iter()
                .map(|(l, x)| {
                    json!({
                        "symbol": l,
                        "chainCirculating": {"Ethereum": {"current": {"peggedUSD": round_to(*x, 100.0)}}},
                    })
                })
                .collect();
            // listed by the API but not issued on Ethereum
            assets.push(json!({
                "symbol": "USDD",
                "chainCirculating": {"Tron": {"current": {"peggedUSD": 725_000_000.0}}},
            }));
            json!({"peggedAssets": assets})
        }
        Parser::SupplyIssuance | Parser::StakedSupply => unreachable!("scalar parser"),
    }
}

fn scalar_body(spec: &SourceSpec, day: u32, rng: &mut ChaCha8Rng) -> Value {
    let supply = 120_220_000.0 - 85.0 * f64::from(day);
    match spec.parser {
        Parser::SupplyIssuance => {
            let burn = round_to(2_450.0 + 1_400.0 * rng.random::<f64>(), 1000.0);
            json!({"issuance_eth": 2_600.0, "burn_eth": burn, "supply_eth": supply, "period_days": 1})
        }
        Parser::StakedSupply => {
            let staked = (22_100_000.0 + 31_000.0 * f64::from(day) + 4_000.0 * rng.random::<f64>()).round();
            json!({"staked_eth": staked, "total_supply_eth": supply})
        }
        _ => unreachable!("distribution parser"),
    }
}

/// Generates every source's payload for `days` consecutive days from `start`.
pub fn generate(start: NaiveDate, days: u32, seed: u64) -> Result<Vec<FixtureFile>> {
    if days == 0 {
        return Err(Error::invalid_argument("corpus needs at least one day"));
    }
    let specs: Vec<SourceSpec> = default_sources().into_iter().chain(scalar_sources()).collect();
    let mut files = Vec::with_capacity(specs.len() * days as usize);
    for (i, spec) in specs.iter().enumerate() {
        let mut rng = stream(seed, i);
        let prof = profile(&spec.source_id);
        for day in 0..days {
            let date = start
                .checked_add_days(Days::new(u64::from(day)))
                .ok_or_else(|| Error::invalid_argument("corpus runs past the end of the calendar"))?;
            let body = match &prof {
                Some(p) => distribution_body(spec, &quantities(p, day, days, &mut rng)),
                None => scalar_body(spec, day, &mut rng),
            };
            let mut body = serde_json::to_string_pretty(&body).expect("json values serialize");
            body.push('\n');
            files.push(FixtureFile {
                source_id: spec.source_id.clone(),
                date,
                body,
            });
        }
    }
    Ok(files)
}

/// Writes a corpus under `dir` and returns the written paths.
pub fn write_corpus(dir: &Path, start: NaiveDate, days: u32, seed: u64) -> Result<Vec<PathBuf>> {
    let files = generate(start, days, seed)?;
    let mut paths = Vec::with_capacity(files.len());
    for f in files {
        let path = f.path(dir);
        fs::create_dir_all(path.parent().expect("fixture path has a parent"))?;
        fs::write(&path, f.body.as_bytes())?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingestion::fetch::{FetchMode, RawPayload};
    use crate::ingestion::parse::parse;

    #[test]
    fn every_payload_parses() {
        let start: NaiveDate = DEFAULT_START.parse().unwrap();
        let files = generate(start, 90, DEFAULT_SEED).unwrap();
        assert_eq!(files.len(), 14 * 90);
        let specs: Vec<_> = default_sources().into_iter().chain(scalar_sources()).collect();
        for f in &files {
            let spec = specs.iter().find(|s| s.source_id == f.source_id).unwrap();
            let raw = RawPayload {
                source_id: f.source_id.clone(),
                date: f.date,
                bytes: f.body.clone().into_bytes(),
                fetched_at: chrono::DateTime::UNIX_EPOCH,
                mode: FetchMode::Fixture,
                origin: String::new(),
            };
            parse(spec, &raw).unwrap_or_else(|e| panic!("{} {}: {e}", f.source_id, f.date));
        }
    }

    #[test]
    fn seeded_and_stable() {
        let start: NaiveDate = DEFAULT_START.parse().unwrap();
        assert_eq!(generate(start, 5, 7).unwrap(), generate(start, 5, 7).unwrap());
        assert_ne!(generate(start, 5, 7).unwrap(), generate(start, 5, 8).unwrap());
    }

    #[test]
    fn late_entrants_report_zero() {
        let start: NaiveDate = DEFAULT_START.parse().unwrap();
        let files = generate(start, 90, DEFAULT_SEED).unwrap();
        let tvl: Vec<_> = files.iter().filter(|f| f.source_id == "l2beat-tvl").collect();
        let base_tvl = |body: &str| -> f64 {
            let v: Value = serde_json::from_str(body).unwrap();
            v["projects"]
                .as_array()
                .unwrap()
                .iter()
                .find(|p| p["name"] == "Base")
                .unwrap()["tvl_usd"]
                .as_f64()
                .unwrap()
        };
        assert_eq!(base_tvl(&tvl[77].body), 0.0);
        assert!(base_tvl(&tvl[78].body) > 0.0);
    }
}
