//! Shared test infrastructure: independent oracles, synthetic revision
//! logs, and a canned-response wiki API server.

#![allow(dead_code)]

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use revmotif_core::ingest::{Label, RevisionEvent, RevisionLog};

// ---------------------------------------------------------------------------
// triad classification oracle: permutation-based isomorphism matching
// ---------------------------------------------------------------------------

/// Canonical representative arc sets for the 16 triad classes on {0, 1, 2}.
pub const TRIAD_REPRESENTATIVES: [(&str, &[(usize, usize)]); 16] = [
    ("003", &[]),
    ("012", &[(0, 1)]),
    ("102", &[(0, 1), (1, 0)]),
    ("021D", &[(1, 0), (1, 2)]),
    ("021U", &[(0, 1), (2, 1)]),
    ("021C", &[(0, 1), (1, 2)]),
    ("111D", &[(0, 1), (1, 0), (2, 1)]),
    ("111U", &[(0, 1), (1, 0), (1, 2)]),
    ("030T", &[(0, 1), (2, 1), (0, 2)]),
    ("030C", &[(1, 0), (2, 1), (0, 2)]),
    ("201", &[(0, 1), (1, 0), (1, 2), (2, 1)]),
    ("120D", &[(1, 0), (1, 2), (0, 2), (2, 0)]),
    ("120U", &[(0, 1), (2, 1), (0, 2), (2, 0)]),
    ("120C", &[(0, 1), (1, 2), (0, 2), (2, 0)]),
    ("210", &[(0, 1), (1, 2), (2, 1), (0, 2), (2, 0)]),
    ("300", &[(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)]),
];

const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn arcs_to_matrix(arcs: &[(usize, usize)]) -> [[bool; 3]; 3] {
    let mut m = [[false; 3]; 3];
    for &(s, d) in arcs {
        m[s][d] = true;
    }
    m
}

/// Classify a labeled 3-node arc set by matching it, under all 6 node
/// permutations, against the canonical representative of each class.
pub fn classify_by_isomorphism(arcs: &[(usize, usize)]) -> &'static str {
    let input = arcs_to_matrix(arcs);
    for (code, rep_arcs) in TRIAD_REPRESENTATIVES {
        let rep = arcs_to_matrix(rep_arcs);
        for perm in PERMUTATIONS {
            let mut matches = true;
            'cells: for i in 0..3 {
                for j in 0..3 {
                    if i != j && input[i][j] != rep[perm[i]][perm[j]] {
                        matches = false;
                        break 'cells;
                    }
                }
            }
            if matches {
                return code;
            }
        }
    }
    unreachable!("the 16 classes partition all 64 arc patterns");
}

// ---------------------------------------------------------------------------
// eigensolver oracle: classical Jacobi with max-off-diagonal pivoting
// ---------------------------------------------------------------------------

/// Eigendecomposition of a symmetric matrix by classical (largest-pivot)
/// Jacobi rotations. Deliberately a different route from the production
/// solver's cyclic sweeps. Returns eigenvalues descending with matching
/// eigenvectors as rows.
pub fn eigh_oracle(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v = vec![vec![0.0f64; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(f64::MIN_POSITIVE);

    for _ in 0..20_000 {
        let mut p = 0;
        let mut q = 1;
        let mut largest = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                if a[i][j].abs() > largest {
                    largest = a[i][j].abs();
                    p = i;
                    q = j;
                }
            }
        }
        if largest <= 1e-13 * scale {
            break;
        }
        let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        let t = if theta >= 0.0 {
            1.0 / (theta + (1.0 + theta * theta).sqrt())
        } else {
            -1.0 / (-theta + (1.0 + theta * theta).sqrt())
        };
        let c = 1.0 / (1.0 + t * t).sqrt();
        let s = t * c;
        let apq = a[p][q];
        let app = a[p][p];
        let aqq = a[q][q];
        a[p][p] = app - t * apq;
        a[q][q] = aqq + t * apq;
        a[p][q] = 0.0;
        a[q][p] = 0.0;
        for i in 0..n {
            if i != p && i != q {
                let aip = a[i][p];
                let aiq = a[i][q];
                a[i][p] = c * aip - s * aiq;
                a[p][i] = a[i][p];
                a[i][q] = s * aip + c * aiq;
                a[q][i] = a[i][q];
            }
        }
        for row in v.iter_mut() {
            let vip = row[p];
            let viq = row[q];
            row[p] = c * vip - s * viq;
            row[q] = s * vip + c * viq;
        }
    }

    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|c| (a[c][c], (0..n).map(|r| v[r][c]).collect()))
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let eigenvalues = pairs.iter().map(|(l, _)| *l).collect();
    let vectors = pairs.into_iter().map(|(_, vec)| vec).collect();
    (eigenvalues, vectors)
}

// ---------------------------------------------------------------------------
// synthetic revision logs
// ---------------------------------------------------------------------------

pub fn base_time() -> DateTime<Utc> {
    Utc.timestamp_opt(1_500_000_000, 0).unwrap()
}

/// Log with one event per entry of `editors`, hourly spacing, oldest first.
pub fn synth_log(id: &str, label: Label, editors: &[String]) -> RevisionLog {
    let events: Vec<RevisionEvent> = editors
        .iter()
        .enumerate()
        .map(|(i, editor)| RevisionEvent {
            editor: editor.clone(),
            timestamp: base_time() + chrono::Duration::hours(i as i64),
        })
        .collect();
    let fetched_at = events
        .last()
        .map(|e| e.timestamp + chrono::Duration::days(30))
        .unwrap_or_else(base_time);
    RevisionLog {
        article_id: id.to_owned(),
        title: id.to_owned(),
        label,
        fetched_at,
        events,
    }
}

fn editor_name(i: usize) -> String {
    format!("editor{i:03}")
}

/// Uniformly random editor sequence.
pub fn random_sequence(rng: &mut ChaCha8Rng, n_editors: usize, n_events: usize) -> Vec<String> {
    (0..n_events)
        .map(|_| editor_name(rng.random_range(0..n_editors)))
        .collect()
}

/// Sequence with frequent immediate back-and-forth between the last two
/// editors, interleaved with jumps to fresh editors.
pub fn reciprocation_heavy_sequence(
    rng: &mut ChaCha8Rng,
    n_editors: usize,
    n_events: usize,
) -> Vec<String> {
    let mut seq: Vec<usize> = vec![rng.random_range(0..n_editors)];
    while seq.len() < n_events {
        let cur = seq[seq.len() - 1];
        let prev = if seq.len() >= 2 {
            Some(seq[seq.len() - 2])
        } else {
            None
        };
        let next = match prev {
            Some(p) if p != cur && rng.random_range(0.0..1.0) < 0.5 => p,
            _ => loop {
                let candidate = rng.random_range(0..n_editors);
                if candidate != cur {
                    break candidate;
                }
            },
        };
        seq.push(next);
    }
    seq.into_iter().map(editor_name).collect()
}

/// Every editor revises exactly once: the network is a directed path with
/// no reciprocated edges at all.
pub fn chain_sequence(rng: &mut ChaCha8Rng, n_editors: usize) -> Vec<String> {
    let mut editors: Vec<usize> = (0..n_editors).collect();
    // Fisher-Yates
    for i in (1..editors.len()).rev() {
        let j = rng.random_range(0..=i);
        editors.swap(i, j);
    }
    editors.into_iter().map(editor_name).collect()
}

pub fn reciprocation_cohort(count: usize, seed: u64, label: Label) -> Vec<RevisionLog> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n_editors = rng.random_range(12..=30);
            let n_events = rng.random_range(60..=120);
            let seq = reciprocation_heavy_sequence(&mut rng, n_editors, n_events);
            synth_log(&format!("recip{i:04}"), label, &seq)
        })
        .collect()
}

pub fn chain_cohort(count: usize, seed: u64, label: Label) -> Vec<RevisionLog> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n_editors = rng.random_range(25..=60);
            let seq = chain_sequence(&mut rng, n_editors);
            synth_log(&format!("chain{i:04}"), label, &seq)
        })
        .collect()
}

pub fn write_fixture(path: &std::path::Path, logs: &[RevisionLog]) {
    let mut buf = Vec::new();
    revmotif_core::ingest::write_fixtures(&mut buf, logs).unwrap();
    std::fs::write(path, buf).unwrap();
}

// ---------------------------------------------------------------------------
// canned wiki API server
// ---------------------------------------------------------------------------

pub type Params = HashMap<String, String>;

pub enum MockResponse {
    Json(String),
    Status(u16),
}

type Responder = dyn Fn(&Params) -> MockResponse + Send + Sync;

pub struct MockWiki {
    pub endpoint: String,
    requests: Arc<Mutex<Vec<Params>>>,
    stop: Arc<AtomicBool>,
    handle: Option<std::thread::JoinHandle<()>>,
}

impl MockWiki {
    pub fn start<F>(responder: F) -> MockWiki
    where
        F: Fn(&Params) -> MockResponse + Send + Sync + 'static,
    {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        listener.set_nonblocking(true).unwrap();
        let endpoint = format!("http://{}/api.php", listener.local_addr().unwrap());
        let requests: Arc<Mutex<Vec<Params>>> = Arc::new(Mutex::new(Vec::new()));
        let stop = Arc::new(AtomicBool::new(false));
        let responder: Arc<Responder> = Arc::new(responder);

        let thread_requests = requests.clone();
        let thread_stop = stop.clone();
        let handle = std::thread::spawn(move || {
            while !thread_stop.load(Ordering::Relaxed) {
                match listener.accept() {
                    Ok((stream, _)) => {
                        stream.set_nonblocking(false).ok();
                        if let Some(params) = read_request(&stream) {
                            thread_requests.lock().unwrap().push(params.clone());
                            write_response(&stream, &responder(&params));
                        }
                    }
                    Err(ref e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                        std::thread::sleep(std::time::Duration::from_millis(5));
                    }
                    Err(_) => break,
                }
            }
        });

        MockWiki {
            endpoint,
            requests,
            stop,
            handle: Some(handle),
        }
    }

    pub fn requests(&self) -> Vec<Params> {
        self.requests.lock().unwrap().clone()
    }

    pub fn request_count(&self) -> usize {
        self.requests.lock().unwrap().len()
    }
}

impl Drop for MockWiki {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(handle) = self.handle.take() {
            handle.join().ok();
        }
    }
}

fn percent_decode(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'+' => {
                out.push(b' ');
                i += 1;
            }
            b'%' if i + 2 < bytes.len() => {
                match u8::from_str_radix(
                    std::str::from_utf8(&bytes[i + 1..i + 3]).unwrap_or("zz"),
                    16,
                ) {
                    Ok(v) => {
                        out.push(v);
                        i += 3;
                    }
                    Err(_) => {
                        out.push(b'%');
                        i += 1;
                    }
                }
            }
            b => {
                out.push(b);
                i += 1;
            }
        }
    }
    String::from_utf8_lossy(&out).into_owned()
}

fn read_request(stream: &TcpStream) -> Option<Params> {
    let mut reader = BufReader::new(stream);
    let mut request_line = String::new();
    reader.read_line(&mut request_line).ok()?;
    let path = request_line.split_whitespace().nth(1)?;
    // drain headers
    loop {
        let mut line = String::new();
        reader.read_line(&mut line).ok()?;
        if line == "\r\n" || line == "\n" || line.is_empty() {
            break;
        }
    }
    let query = path.split_once('?').map(|(_, q)| q).unwrap_or("");
    let mut params = HashMap::new();
    for pair in query.split('&').filter(|p| !p.is_empty()) {
        let (k, v) = pair.split_once('=').unwrap_or((pair, ""));
        params.insert(percent_decode(k), percent_decode(v));
    }
    Some(params)
}

fn write_response(mut stream: &TcpStream, response: &MockResponse) {
    let (status, body) = match response {
        MockResponse::Json(body) => (200, body.clone()),
        MockResponse::Status(code) => (*code, String::from("{}")),
    };
    let reason = if status == 200 { "OK" } else { "Error" };
    let payload = format!(
        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
    stream.write_all(payload.as_bytes()).ok();
    stream.flush().ok();
    stream.shutdown(std::net::Shutdown::Both).ok();
}

/// Standard query-API page payload for one title.
pub fn revisions_page(
    pageid: i64,
    title: &str,
    revisions: &[(&str, &str)],
    continue_token: Option<&str>,
) -> String {
    let revs: Vec<String> = revisions
        .iter()
        .map(|(user, ts)| format!(r#"{{"user":"{user}","timestamp":"{ts}"}}"#))
        .collect();
    let continue_part = continue_token
        .map(|t| format!(r#""continue":{{"rvcontinue":"{t}","continue":"||"}},"#))
        .unwrap_or_default();
    format!(
        r#"{{{continue_part}"query":{{"pages":{{"{pageid}":{{"pageid":{pageid},"ns":0,"title":"{title}","revisions":[{}]}}}}}}}}"#,
        revs.join(",")
    )
}

pub fn missing_page_body() -> String {
    r#"{"query":{"pages":{"-1":{"ns":0,"title":"Nope","missing":""}}}}"#.to_owned()
}
