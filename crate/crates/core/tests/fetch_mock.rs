//! Wiki client behavior against a canned local API server: continuation,
//! retry, batch-size independence, and checkpointed batch fetching.

mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use common::{missing_page_body, revisions_page, MockResponse, MockWiki};
use revmotif_core::error::Error;
use revmotif_core::ingest::{load_fixtures, Label, WikiClient, WikiClientConfig};
use revmotif_core::pipeline::{cmd_fetch, FetchConfig};

fn fast_config(endpoint: &str, batch_limit: u32) -> WikiClientConfig {
    WikiClientConfig {
        endpoint: endpoint.to_owned(),
        batch_limit,
        politeness: Duration::from_millis(1),
        max_attempts: 3,
        retry_base: Duration::from_millis(2),
    }
}

/// Responder that serves a fixed revision list for any title, paging by the
/// requested rvlimit and an offset-encoded rvcontinue token.
fn paging_responder(
    revisions: Vec<(&'static str, &'static str)>,
) -> impl Fn(&common::Params) -> MockResponse + Send + Sync + 'static {
    move |params| {
        let limit: usize = params
            .get("rvlimit")
            .and_then(|v| v.parse().ok())
            .unwrap_or(10);
        let offset: usize = params
            .get("rvcontinue")
            .and_then(|v| v.strip_prefix("off|"))
            .and_then(|v| v.parse().ok())
            .unwrap_or(0);
        let end = (offset + limit).min(revisions.len());
        let token = if end < revisions.len() {
            Some(format!("off|{end}"))
        } else {
            None
        };
        MockResponse::Json(revisions_page(
            4242,
            params.get("titles").map(String::as_str).unwrap_or("?"),
            &revisions[offset..end],
            token.as_deref(),
        ))
    }
}

fn six_revisions() -> Vec<(&'static str, &'static str)> {
    // newest first, as the live API returns them
    vec![
        ("fiona", "2020-01-06T00:00:00Z"),
        ("ed", "2020-01-05T00:00:00Z"),
        ("dana", "2020-01-04T00:00:00Z"),
        ("carol", "2020-01-03T00:00:00Z"),
        ("bob", "2020-01-02T00:00:00Z"),
        ("alice", "2020-01-01T00:00:00Z"),
    ]
}

#[test]
fn continuation_pages_are_followed_and_sorted() {
    let server = MockWiki::start(paging_responder(six_revisions()));
    let client = WikiClient::new(fast_config(&server.endpoint, 2)).unwrap();
    let log = client.fetch_revisions("Sample Article").unwrap();

    assert_eq!(server.request_count(), 3, "3 pages of 2 events each");
    assert_eq!(log.events.len(), 6);
    assert_eq!(log.article_id, "4242");
    assert_eq!(log.events[0].editor, "alice");
    assert_eq!(log.events[5].editor, "fiona");
    let times: Vec<_> = log.events.iter().map(|e| e.timestamp).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn result_is_independent_of_batch_limit() {
    let server = MockWiki::start(paging_responder(six_revisions()));
    let small = WikiClient::new(fast_config(&server.endpoint, 2))
        .unwrap()
        .fetch_revisions("T")
        .unwrap();
    let requests_small = server.request_count();
    let large = WikiClient::new(fast_config(&server.endpoint, 5))
        .unwrap()
        .fetch_revisions("T")
        .unwrap();
    let requests_large = server.request_count() - requests_small;

    assert_eq!(small.events, large.events);
    assert_eq!(requests_small, 3);
    assert_eq!(requests_large, 2);
}

#[test]
fn transient_failures_are_retried_with_backoff() {
    let failures = AtomicUsize::new(0);
    let revisions = six_revisions();
    let server = MockWiki::start(move |params| {
        if failures.fetch_add(1, Ordering::SeqCst) < 2 {
            MockResponse::Status(500)
        } else {
            paging_responder(revisions.clone())(params)
        }
    });
    let client = WikiClient::new(fast_config(&server.endpoint, 10)).unwrap();
    let log = client.fetch_revisions("Flaky").unwrap();
    assert_eq!(log.events.len(), 6);
    assert_eq!(server.request_count(), 3, "2 failures + 1 success");
}

#[test]
fn persistent_failure_reports_attempts() {
    let server = MockWiki::start(|_| MockResponse::Status(503));
    let client = WikiClient::new(fast_config(&server.endpoint, 10)).unwrap();
    match client.fetch_revisions("Down") {
        Err(Error::Transport { attempts, .. }) => assert_eq!(attempts, 3),
        other => panic!("unexpected: {other:?}"),
    }
    assert_eq!(server.request_count(), 3);
}

#[test]
fn missing_page_is_not_found() {
    let server = MockWiki::start(|_| MockResponse::Json(missing_page_body()));
    let client = WikiClient::new(fast_config(&server.endpoint, 10)).unwrap();
    assert!(matches!(
        client.fetch_revisions("No Such Page"),
        Err(Error::ArticleNotFound(_))
    ));
}

#[test]
fn malformed_revision_names_field() {
    let server = MockWiki::start(|_| {
        MockResponse::Json(
            r#"{"query":{"pages":{"7":{"pageid":7,"title":"T","revisions":[{"user":"a","timestamp":"not-a-time"}]}}}}"#
                .to_owned(),
        )
    });
    let client = WikiClient::new(fast_config(&server.endpoint, 10)).unwrap();
    match client.fetch_revisions("T") {
        Err(Error::ApiResponse { field, .. }) => {
            assert_eq!(field, "revisions[0].timestamp");
        }
        other => panic!("unexpected: {other:?}"),
    }
}

fn title_responder() -> impl Fn(&common::Params) -> MockResponse + Send + Sync + 'static {
    |params| {
        let title = params.get("titles").cloned().unwrap_or_default();
        let pageid = 1000 + title.len() as i64;
        MockResponse::Json(revisions_page(
            pageid,
            &title,
            &[
                ("zoe", "2021-03-02T00:00:00Z"),
                ("yan", "2021-03-01T00:00:00Z"),
                ("xia", "2021-02-01T00:00:00Z"),
            ],
            None,
        ))
    }
}

#[test]
fn batch_fetch_writes_fixture_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let titles = dir.path().join("titles.tsv");
    std::fs::write(
        &titles,
        "Alpha\tcontroversial\nBeta Article\tnon_controversial\n",
    )
    .unwrap();
    let out = dir.path().join("fixture.jsonl");

    let server = MockWiki::start(title_responder());
    let summary = cmd_fetch(&FetchConfig {
        titles: titles.clone(),
        out: out.clone(),
        client: fast_config(&server.endpoint, 50),
        workers: 2,
    })
    .unwrap();

    assert_eq!(summary.fetched, 2);
    assert_eq!(summary.skipped, 0);
    assert!(summary.failed.is_empty());
    let logs = load_fixtures(&out).unwrap();
    assert_eq!(logs.len(), 2);
    let alpha = logs.iter().find(|l| l.title == "Alpha").unwrap();
    assert_eq!(alpha.label, Label::Controversial);
    assert_eq!(alpha.events.len(), 3);
    assert_eq!(alpha.events[0].editor, "xia");
    // the mock url-decoding round-trips multi-word titles
    assert!(logs.iter().any(|l| l.title == "Beta Article"));
}

#[test]
fn empty_titles_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let titles = dir.path().join("titles.tsv");
    std::fs::write(&titles, "# only a comment\n\n").unwrap();
    let server = MockWiki::start(title_responder());
    let err = cmd_fetch(&FetchConfig {
        titles,
        out: dir.path().join("fixture.jsonl"),
        client: fast_config(&server.endpoint, 50),
        workers: 1,
    })
    .unwrap_err();
    assert!(matches!(err, Error::Precondition(msg) if msg.contains("no input titles")));
}

#[test]
fn interrupted_batch_resumes_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let titles = dir.path().join("titles.tsv");
    std::fs::write(&titles, "First\tcontroversial\nSecond\tnon_controversial\n").unwrap();
    let out = dir.path().join("fixture.jsonl");

    // run 1: the second title persistently fails, as if the run was cut off
    let flaky = MockWiki::start(move |params| {
        if params.get("titles").map(String::as_str) == Some("Second") {
            MockResponse::Status(500)
        } else {
            title_responder()(params)
        }
    });
    let summary = cmd_fetch(&FetchConfig {
        titles: titles.clone(),
        out: out.clone(),
        client: fast_config(&flaky.endpoint, 50),
        workers: 1,
    })
    .unwrap();
    assert_eq!(summary.fetched, 1);
    assert_eq!(summary.failed.len(), 1);
    assert_eq!(load_fixtures(&out).unwrap().len(), 1);
    drop(flaky);

    // run 2: only the unfinished title is requested
    let healthy = MockWiki::start(title_responder());
    let summary = cmd_fetch(&FetchConfig {
        titles,
        out: out.clone(),
        client: fast_config(&healthy.endpoint, 50),
        workers: 1,
    })
    .unwrap();
    assert_eq!(summary.skipped, 1);
    assert_eq!(summary.fetched, 1);
    let requested: Vec<String> = healthy
        .requests()
        .iter()
        .filter_map(|p| p.get("titles").cloned())
        .collect();
    assert_eq!(requested, vec!["Second".to_owned()]);
    let logs = load_fixtures(&out).unwrap();
    assert_eq!(logs.len(), 2);
}
