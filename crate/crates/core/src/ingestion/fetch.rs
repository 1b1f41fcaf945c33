//! Retrieval of raw source payloads, live or from recorded fixtures.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Duration;

use chrono::{DateTime, NaiveDate, SubsecRound, Utc};
use serde::Serialize;

use super::source::SourceSpec;
use crate::error::{Error, Result};

pub const DUNE_API_KEY_ENV: &str = "DUNE_API_KEY";
pub const HTTP_TIMEOUT_ENV: &str = "ETHCONC_HTTP_TIMEOUT_SECS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FetchMode {
    Fixture,
    Live,
}

impl FetchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FetchMode::Fixture => "fixture",
            FetchMode::Live => "live",
        }
    }
}

#[derive(Debug, Clone)]
pub struct HttpConfig {
    pub timeout: Duration,
    /// Total attempts, including the first.
    pub attempts: u32,
    /// Delay before the second attempt; doubles after each retry.
    pub base_delay: Duration,
    pub dune_api_key: Option<String>,
}

impl Default for HttpConfig {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(30),
            attempts: 3,
            base_delay: Duration::from_millis(500),
            dune_api_key: None,
        }
    }
}

impl HttpConfig {
    /// Reads `DUNE_API_KEY` and `ETHCONC_HTTP_TIMEOUT_SECS`.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        cfg.dune_api_key = std::env::var(DUNE_API_KEY_ENV).ok().filter(|k| !k.is_empty());
        if let Some(secs) = std::env::var(HTTP_TIMEOUT_ENV)
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
        {
            cfg.timeout = Duration::from_secs(secs);
        }
        cfg
    }
}

#[derive(Debug, Clone)]
pub struct FetchConfig {
    pub mode: FetchMode,
    pub fixture_dir: Option<PathBuf>,
    pub http: HttpConfig,
}

impl FetchConfig {
    pub fn fixtures(dir: impl Into<PathBuf>) -> Self {
        Self {
            mode: FetchMode::Fixture,
            fixture_dir: Some(dir.into()),
            http: HttpConfig::default(),
        }
    }

    pub fn live(http: HttpConfig) -> Self {
        Self {
            mode: FetchMode::Live,
            fixture_dir: None,
            http,
        }
    }
}

/// A payload as retrieved, before parsing.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPayload {
    pub source_id: String,
    /// Day the payload is recorded under.
    pub date: NaiveDate,
    pub bytes: Vec<u8>,
    pub fetched_at: DateTime<Utc>,
    pub mode: FetchMode,
    /// Fixture path or URL.
    pub origin: String,
}

/// `<dir>/<source-id>/<YYYY-MM-DD>.json`
pub fn fixture_path(dir: &Path, source_id: &str, date: NaiveDate) -> PathBuf {
    dir.join(source_id).join(format!("{date}.json"))
}

pub fn fetch(spec: &SourceSpec, date: NaiveDate, config: &FetchConfig) -> Result<RawPayload> {
    match config.mode {
        FetchMode::Fixture => {
            let dir = config
                .fixture_dir
                .as_deref()
                .ok_or_else(|| Error::invalid_argument("fixture mode needs a fixture directory"))?;
            fetch_fixture(spec, date, dir)
        }
        FetchMode::Live if spec.requires_dune_key && config.http.dune_api_key.is_none() => {
            match config.fixture_dir.as_deref() {
                Some(dir) => {
                    log::warn!(
                        "{DUNE_API_KEY_ENV} not set; reading `{}` from fixtures",
                        spec.source_id
                    );
                    fetch_fixture(spec, date, dir)
                }
                None => Err(Error::SourceUnavailable {
                    source_id: spec.source_id.clone(),
                    trace: vec![format!("{DUNE_API_KEY_ENV} not set and no fixture directory")],
                }),
            }
        }
        FetchMode::Live => fetch_live(spec, date, &config.http),
    }
}

/// Fixture payloads are stamped at midnight UTC of their day so that a
/// fixture ingest is reproducible byte for byte.
fn fetch_fixture(spec: &SourceSpec, date: NaiveDate, dir: &Path) -> Result<RawPayload> {
    let path = fixture_path(dir, &spec.source_id, date);
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(Error::FixtureMissing(path)),
        Err(e) => return Err(e.into()),
    };
    Ok(RawPayload {
        source_id: spec.source_id.clone(),
        date,
        bytes,
        fetched_at: date.and_time(chrono::NaiveTime::MIN).and_utc(),
        mode: FetchMode::Fixture,
        origin: path.display().to_string(),
    })
}

fn fetch_live(spec: &SourceSpec, date: NaiveDate, http: &HttpConfig) -> Result<RawPayload> {
    let key = spec.requires_dune_key.then(|| http.dune_api_key.as_deref()).flatten();
    let bytes = get_with_retry(&spec.endpoint, key, http).map_err(|trace| Error::SourceUnavailable {
        source_id: spec.source_id.clone(),
        trace,
    })?;
    Ok(RawPayload {
        source_id: spec.source_id.clone(),
        date,
        bytes,
        fetched_at: Utc::now().trunc_subsecs(0),
        mode: FetchMode::Live,
        origin: spec.endpoint.clone(),
    })
}

/// GET with exponential backoff on transport errors, 429 and 5xx. Returns the
/// body, or one trace line per failed attempt.
pub fn get_with_retry(url: &str, dune_key: Option<&str>, http: &HttpConfig) -> Result<Vec<u8>, Vec<String>> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(http.timeout))
        .http_status_as_error(false)
        .build()
        .into();
    let attempts = http.attempts.max(1);
    let mut trace = Vec::new();
    let mut delay = http.base_delay;
    for attempt in 1..=attempts {
        let mut req = agent.get(url);
        if let Some(k) = dune_key {
            req = req.header("X-Dune-API-Key", k);
        }
        let retryable = match req.call() {
            Ok(mut resp) => {
                let status = resp.status().as_u16();
                if (200..300).contains(&status) {
                    match resp.body_mut().read_to_vec() {
                        Ok(body) => return Ok(body),
                        Err(e) => {
                            trace.push(format!("attempt {attempt}: body read failed: {e}"));
                            true
                        }
                    }
                } else {
                    trace.push(format!("attempt {attempt}: HTTP {status}"));
                    status == 429 || status >= 500
                }
            }
            Err(e) => {
                trace.push(format!("attempt {attempt}: {e}"));
                true
            }
        };
        if !retryable || attempt == attempts {
            break;
        }
        log::warn!("GET {url} failed (attempt {attempt}/{attempts}), retrying in {delay:?}");
        thread::sleep(delay);
        delay *= 2;
    }
    Err(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingestion::source::default_sources;
    use std::io::{BufRead, BufReader, Write};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    /// Serves `statuses` in order, one per connection, then stops.
    fn serve(statuses: Vec<(u16, &'static str)>) -> (String, Arc<AtomicUsize>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/data", listener.local_addr().unwrap());
        let hits = Arc::new(AtomicUsize::new(0));
        let counter = hits.clone();
        thread::spawn(move || {
            for (status, body) in statuses {
                let Ok((mut stream, _)) = listener.accept() else { return };
                counter.fetch_add(1, Ordering::SeqCst);
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut line = String::new();
                while reader.read_line(&mut line).is_ok_and(|n| n > 2) {
                    line.clear();
                }
                let _ = write!(
                    stream,
                    "HTTP/1.1 {status} X\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                    body.len()
                );
            }
        });
        (url, hits)
    }

    fn fast() -> HttpConfig {
        HttpConfig {
            timeout: Duration::from_secs(5),
            attempts: 3,
            base_delay: Duration::from_millis(1),
            dune_api_key: None,
        }
    }

    #[test]
    fn rate_limited_three_times_is_unavailable() {
        let (url, hits) = serve(vec![(429, ""), (429, ""), (429, "")]);
        let mut spec = default_sources().remove(0);
        spec.endpoint = url;
        let err = fetch(&spec, NaiveDate::MIN, &FetchConfig::live(fast())).unwrap_err();
        match err {
            Error::SourceUnavailable { source_id, trace } => {
                assert_eq!(source_id, spec.source_id);
                assert_eq!(trace.len(), 3);
                assert!(trace.iter().all(|t| t.contains("HTTP 429")));
            }
            other => panic!("unexpected {other}"),
        }
        assert_eq!(hits.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn recovers_after_transient_failure() {
        let (url, hits) = serve(vec![(503, ""), (200, "{\"a\":1}")]);
        let body = get_with_retry(&url, None, &fast()).unwrap();
        assert_eq!(body, b"{\"a\":1}");
        assert_eq!(hits.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn client_errors_are_not_retried() {
        let (url, hits) = serve(vec![(404, ""), (200, "")]);
        let trace = get_with_retry(&url, None, &fast()).unwrap_err();
        assert_eq!(trace.len(), 1);
        assert_eq!(hits.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn fixture_mode() {
        let dir = tempfile::tempdir().unwrap();
        let spec = default_sources().remove(0);
        let date = NaiveDate::from_ymd_opt(2023, 5, 23).unwrap();
        let cfg = FetchConfig::fixtures(dir.path());

        let err = fetch(&spec, date, &cfg).unwrap_err();
        let expected = fixture_path(dir.path(), &spec.source_id, date);
        assert!(matches!(&err, Error::FixtureMissing(p) if *p == expected));
        assert!(err.to_string().contains("2023-05-23.json"));

        fs::create_dir_all(expected.parent().unwrap()).unwrap();
        fs::write(&expected, b"{\"teku\": 5}").unwrap();
        let raw = fetch(&spec, date, &cfg).unwrap();
        assert_eq!(raw.bytes, b"{\"teku\": 5}");
        assert_eq!(raw.mode, FetchMode::Fixture);
        assert_eq!(raw.fetched_at.to_rfc3339(), "2023-05-23T00:00:00+00:00");
    }

    #[test]
    fn dune_without_key_falls_back_to_fixtures() {
        let dir = tempfile::tempdir().unwrap();
        let spec = default_sources()
            .into_iter()
            .find(|s| s.requires_dune_key)
            .unwrap();
        let date = NaiveDate::from_ymd_opt(2023, 5, 23).unwrap();
        let path = fixture_path(dir.path(), &spec.source_id, date);
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, b"{}").unwrap();

        let mut cfg = FetchConfig::live(fast());
        assert!(matches!(fetch(&spec, date, &cfg), Err(Error::SourceUnavailable { .. })));
        cfg.fixture_dir = Some(dir.path().to_owned());
        assert_eq!(fetch(&spec, date, &cfg).unwrap().mode, FetchMode::Fixture);
    }
}
