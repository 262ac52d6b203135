//! Revision-log acquisition: live wiki API, local fixture files, labels,
//! and per-article metadata.
//!
//! Fixture format is JSON Lines, one article per line:
//!
//! ```json
//! {"article_id": "...", "title": "...", "label": "controversial",
//!  "fetched_at": "2024-01-01T00:00:00Z",
//!  "revisions": [{"user": "...", "timestamp": "2023-12-31T23:00:00Z"}, ...]}
//! ```
//!
//! Anonymous editors are keyed by their IP string exactly as the source
//! reports it. Bot accounts are not filtered unless a name pattern is
//! supplied explicitly.

mod fetch;

pub use fetch::{WikiClient, WikiClientConfig, ENDPOINT_ENV};

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Controversial,
    NonControversial,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Controversial => "controversial",
            Label::NonControversial => "non_controversial",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "controversial" => Some(Label::Controversial),
            "non_controversial" => Some(Label::NonControversial),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionEvent {
    #[serde(rename = "user")]
    pub editor: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionLog {
    pub article_id: String,
    pub title: String,
    pub label: Label,
    pub fetched_at: DateTime<Utc>,
    /// Chronological, oldest first.
    #[serde(rename = "revisions")]
    pub events: Vec<RevisionEvent>,
}

impl RevisionLog {
    pub fn distinct_editors(&self) -> usize {
        self.events
            .iter()
            .map(|e| e.editor.as_str())
            .collect::<HashSet<_>>()
            .len()
    }

    /// Copy with events by editors matching `pattern` removed.
    pub fn without_editors(&self, pattern: &Regex) -> RevisionLog {
        RevisionLog {
            events: self
                .events
                .iter()
                .filter(|e| !pattern.is_match(&e.editor))
                .cloned()
                .collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArticleMetadata {
    /// Distinct editor identifiers in the log.
    pub editor_count: usize,
    /// Days from the first event to the reference instant.
    pub age_days: f64,
    /// Mean revisions per 30-day window; the raw event count when age_zero.
    pub edit_rate: f64,
    /// Set when the article's age is zero and the rate is degenerate.
    pub age_zero: bool,
}

/// editor_count, age, and edit rate for one log, measured against `as_of`.
pub fn compute_metadata(log: &RevisionLog, as_of: DateTime<Utc>) -> Result<ArticleMetadata> {
    let first = log.events.first().ok_or_else(|| {
        Error::InsufficientData(format!("article {:?} has no events", log.article_id))
    })?;
    let age_seconds = (as_of - first.timestamp).num_seconds();
    if age_seconds < 0 {
        return Err(Error::Precondition(format!(
            "as_of predates the first event of {:?}",
            log.article_id
        )));
    }
    let editor_count = log.distinct_editors();
    let total = log.events.len() as f64;
    let age_days = age_seconds as f64 / 86_400.0;
    if age_days == 0.0 {
        return Ok(ArticleMetadata {
            editor_count,
            age_days: 0.0,
            edit_rate: total,
            age_zero: true,
        });
    }
    Ok(ArticleMetadata {
        editor_count,
        age_days,
        edit_rate: total / (age_days / 30.0),
        age_zero: false,
    })
}

fn validate_log(log: &RevisionLog, source: &str, line: usize) -> Result<()> {
    if log.article_id.is_empty() {
        return Err(Error::Parse {
            input: source.to_owned(),
            line,
            message: "empty article_id".into(),
        });
    }
    for (i, event) in log.events.iter().enumerate() {
        if event.editor.is_empty() {
            return Err(Error::Parse {
                input: source.to_owned(),
                line,
                message: format!("revisions[{i}]: empty user"),
            });
        }
    }
    Ok(())
}

/// Parse fixture lines from any reader. `source` names the input in errors.
///
/// Events are stably sorted by timestamp so logs always come out oldest
/// first; duplicate article ids are rejected.
pub fn parse_fixtures<R: BufRead>(reader: R, source: &str) -> Result<Vec<RevisionLog>> {
    let mut logs = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            input: source.to_owned(),
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let mut log: RevisionLog = serde_json::from_str(&line).map_err(|e| Error::Parse {
            input: source.to_owned(),
            line: line_no,
            message: e.to_string(),
        })?;
        validate_log(&log, source, line_no)?;
        if !seen_ids.insert(log.article_id.clone()) {
            return Err(Error::DuplicateArticle(log.article_id));
        }
        log.events.sort_by_key(|e| e.timestamp);
        logs.push(log);
    }
    Ok(logs)
}

/// Load a JSON Lines fixture file.
pub fn load_fixtures(path: &Path) -> Result<Vec<RevisionLog>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_fixtures(BufReader::new(file), &path.display().to_string())
}

/// Serialize logs as fixture lines.
pub fn write_fixtures<W: Write>(mut writer: W, logs: &[RevisionLog]) -> Result<()> {
    for log in logs {
        let line = serde_json::to_string(log)
            .map_err(|e| Error::Numerical(format!("fixture serialization: {e}")))?;
        writer
            .write_all(line.as_bytes())
            .and_then(|_| writer.write_all(b"\n"))
            .map_err(|e| Error::io("<writer>", e))?;
    }
    Ok(())
}
