//! Revision-history client for the MediaWiki query API.
//!
//! Pages the full history with `rvcontinue` tokens, retries transport
//! failures with bounded exponential backoff, and rate-limits requests
//! through a shared politeness delay so concurrent fetches stay friendly
//! to the endpoint.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde_json::Value;

use super::{Label, RevisionEvent, RevisionLog};
use crate::error::{Error, Result};

/// Environment variable overriding the default API endpoint.
pub const ENDPOINT_ENV: &str = "REVMOTIF_ENDPOINT";

const DEFAULT_ENDPOINT: &str = "https://en.wikipedia.org/w/api.php";

#[derive(Debug, Clone)]
pub struct WikiClientConfig {
    pub endpoint: String,
    pub batch_limit: u32,
    /// Minimum spacing between consecutive requests.
    pub politeness: Duration,
    /// Attempts per request, including the first.
    pub max_attempts: u32,
    /// Backoff before retry i is `retry_base * 2^(i-1)`.
    pub retry_base: Duration,
}

impl Default for WikiClientConfig {
    fn default() -> Self {
        WikiClientConfig {
            endpoint: std::env::var(ENDPOINT_ENV).unwrap_or_else(|_| DEFAULT_ENDPOINT.to_owned()),
            batch_limit: 500,
            politeness: Duration::from_millis(200),
            max_attempts: 5,
            retry_base: Duration::from_millis(250),
        }
    }
}

pub struct WikiClient {
    config: WikiClientConfig,
    http: reqwest::blocking::Client,
    last_request: Mutex<Option<Instant>>,
}

impl WikiClient {
    pub fn new(config: WikiClientConfig) -> Result<Self> {
        if config.batch_limit == 0 {
            return Err(Error::Precondition("batch_limit must be positive".into()));
        }
        if config.max_attempts == 0 {
            return Err(Error::Precondition("max_attempts must be positive".into()));
        }
        let http = reqwest::blocking::Client::builder()
            .user_agent(concat!("revmotif/", env!("CARGO_PKG_VERSION")))
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| Error::Transport {
                attempts: 0,
                message: e.to_string(),
            })?;
        Ok(WikiClient {
            config,
            http,
            last_request: Mutex::new(None),
        })
    }

    pub fn config(&self) -> &WikiClientConfig {
        &self.config
    }

    /// Complete revision history for one article title.
    ///
    /// Events come back oldest first regardless of the API's return order.
    /// The label defaults to non-controversial; callers that know the label
    /// set it on the returned log.
    pub fn fetch_revisions(&self, title: &str) -> Result<RevisionLog> {
        if title.is_empty() {
            return Err(Error::Precondition("title must be non-empty".into()));
        }
        let batch = self.config.batch_limit.to_string();
        let mut continue_token: Option<String> = None;
        let mut events: Vec<RevisionEvent> = Vec::new();
        let mut article_id: Option<String> = None;
        let mut canonical_title: Option<String> = None;

        loop {
            let mut params: Vec<(&str, &str)> = vec![
                ("action", "query"),
                ("prop", "revisions"),
                ("titles", title),
                ("rvprop", "user|timestamp"),
                ("rvlimit", &batch),
                ("format", "json"),
            ];
            if let Some(token) = continue_token.as_deref() {
                params.push(("rvcontinue", token));
            }
            let body = self.request_with_retry(&params)?;

            let page = first_page(&body)?;
            if page.get("missing").is_some()
                || page.get("pageid").and_then(Value::as_i64).unwrap_or(0) < 0
                || page.get("invalid").is_some()
            {
                return Err(Error::ArticleNotFound(title.to_owned()));
            }
            if article_id.is_none() {
                let pageid = page
                    .get("pageid")
                    .and_then(Value::as_i64)
                    .ok_or_else(|| api_error("query.pages[].pageid", "missing or non-integer"))?;
                article_id = Some(pageid.to_string());
                canonical_title = Some(
                    page.get("title")
                        .and_then(Value::as_str)
                        .unwrap_or(title)
                        .to_owned(),
                );
            }
            if let Some(revisions) = page.get("revisions") {
                let list = revisions
                    .as_array()
                    .ok_or_else(|| api_error("query.pages[].revisions", "not an array"))?;
                for (i, rev) in list.iter().enumerate() {
                    events.push(parse_revision(rev, i)?);
                }
            }

            match body
                .get("continue")
                .and_then(|c| c.get("rvcontinue"))
                .and_then(Value::as_str)
            {
                Some(token) => continue_token = Some(token.to_owned()),
                None => break,
            }
        }

        events.sort_by_key(|e| e.timestamp);
        Ok(RevisionLog {
            article_id: article_id.expect("set on first page"),
            title: canonical_title.expect("set on first page"),
            label: Label::NonControversial,
            fetched_at: Utc::now(),
            events,
        })
    }

    fn request_with_retry(&self, params: &[(&str, &str)]) -> Result<Value> {
        let mut last_error = String::new();
        for attempt in 1..=self.config.max_attempts {
            if attempt > 1 {
                let backoff = self.config.retry_base * 2u32.pow(attempt - 2);
                std::thread::sleep(backoff);
            }
            self.wait_politely();
            match self.attempt(params) {
                Ok(body) => return Ok(body),
                Err(RequestFailure::Retryable(message)) => last_error = message,
                Err(RequestFailure::Fatal(err)) => return Err(err),
            }
        }
        Err(Error::Transport {
            attempts: self.config.max_attempts,
            message: last_error,
        })
    }

    fn attempt(&self, params: &[(&str, &str)]) -> std::result::Result<Value, RequestFailure> {
        let response = self
            .http
            .get(&self.config.endpoint)
            .query(params)
            .send()
            .map_err(|e| RequestFailure::Retryable(e.to_string()))?;
        let status = response.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(RequestFailure::Retryable(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(RequestFailure::Fatal(Error::Transport {
                attempts: 1,
                message: format!("HTTP {status}"),
            }));
        }
        response
            .json::<Value>()
            .map_err(|e| RequestFailure::Fatal(api_error("<body>", &format!("invalid JSON: {e}"))))
    }

    fn wait_politely(&self) {
        let mut last = self.last_request.lock().unwrap();
        if let Some(prev) = *last {
            let elapsed = prev.elapsed();
            if elapsed < self.config.politeness {
                std::thread::sleep(self.config.politeness - elapsed);
            }
        }
        *last = Some(Instant::now());
    }
}

enum RequestFailure {
    Retryable(String),
    Fatal(Error),
}

fn api_error(field: &str, message: &str) -> Error {
    Error::ApiResponse {
        field: field.to_owned(),
        message: message.to_owned(),
    }
}

fn first_page(body: &Value) -> Result<&Value> {
    let pages = body
        .get("query")
        .and_then(|q| q.get("pages"))
        .ok_or_else(|| api_error("query.pages", "missing"))?;
    let obj = pages
        .as_object()
        .ok_or_else(|| api_error("query.pages", "not an object"))?;
    // single-title query: exactly one page entry (sorted for determinism)
    obj.iter()
        .min_by(|a, b| a.0.cmp(b.0))
        .map(|(_, v)| v)
        .ok_or_else(|| api_error("query.pages", "empty"))
}

fn parse_revision(rev: &Value, index: usize) -> Result<RevisionEvent> {
    let editor = rev.get("user").and_then(Value::as_str).ok_or_else(|| {
        api_error(
            &format!("revisions[{index}].user"),
            "missing or not a string",
        )
    })?;
    if editor.is_empty() {
        return Err(api_error(&format!("revisions[{index}].user"), "empty"));
    }
    let raw_ts = rev
        .get("timestamp")
        .and_then(Value::as_str)
        .ok_or_else(|| {
            api_error(
                &format!("revisions[{index}].timestamp"),
                "missing or not a string",
            )
        })?;
    let timestamp = raw_ts
        .parse::<DateTime<Utc>>()
        .map_err(|e| api_error(&format!("revisions[{index}].timestamp"), &e.to_string()))?;
    Ok(RevisionEvent {
        editor: editor.to_owned(),
        timestamp,
    })
}
