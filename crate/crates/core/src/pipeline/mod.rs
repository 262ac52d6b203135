//! End-to-end orchestration: fetch/load, build, census, profiles, analysis,
//! reports.
//!
//! A run is driven by one seed recorded in the manifest; per-article
//! ensemble seeds derive from it and the article id, so results do not
//! depend on article order or worker count. Expensive stage outputs
//! (structure+census, profiles) are persisted under `<out>/.cache/`, keyed
//! by a hash of the inputs that determine them, and reused on re-analysis.

mod outputs;
mod plot;

pub use outputs::{read_metadata_csv, read_projection_csv, read_srp_csv};
pub use plot::{cmd_plotdata, FIGURES};

use std::collections::{HashMap, HashSet, VecDeque};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    external_correlates, pairwise_pearson, pca_fit, pca_fit_standardized, pca_project,
    CorrelateReport, PcaResult, PearsonSummary, Projection, SrpMatrix,
};
use crate::census::triad_census;
use crate::error::{Error, Result};
use crate::graph::build_revision_network;
use crate::ingest::{
    compute_metadata, load_fixtures, ArticleMetadata, Label, RevisionLog, WikiClient,
    WikiClientConfig,
};
use crate::nullmodel::{ensemble_census, NullModelConfig};
use crate::srp::{compute_delta, normalize_srp, significant_motifs, MotifReport, SrpProfile};

pub const DEFAULT_CUTOFF: f64 = 0.3;
pub const DEFAULT_PCA_K: usize = 2;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub fixture: PathBuf,
    pub out_dir: PathBuf,
    pub null: NullModelConfig,
    pub cutoff: f64,
    pub pca_k: usize,
    /// Worker threads; 0 uses the process-wide default. Not part of the
    /// result: outputs are identical for any worker count.
    pub workers: usize,
    /// Editors matching this pattern are dropped before network construction.
    pub bot_filter: Option<String>,
    /// Fit PCA on the correlation matrix instead of the covariance matrix.
    pub standardize: bool,
}

impl PipelineConfig {
    pub fn new(fixture: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            fixture: fixture.into(),
            out_dir: out_dir.into(),
            null: NullModelConfig::default(),
            cutoff: DEFAULT_CUTOFF,
            pca_k: DEFAULT_PCA_K,
            workers: 0,
            bot_filter: None,
            standardize: false,
        }
    }

    fn validate(&self) -> Result<()> {
        self.null.validate()?;
        if !(self.cutoff > 0.0) {
            return Err(Error::Precondition(format!(
                "cutoff must be > 0, got {}",
                self.cutoff
            )));
        }
        if !matches!(self.pca_k, 2 | 3) {
            return Err(Error::Precondition(format!(
                "pca-k must be 2 or 3, got {}",
                self.pca_k
            )));
        }
        if let Some(pattern) = &self.bot_filter {
            Regex::new(pattern).map_err(|e| {
                Error::Precondition(format!("invalid bot-filter pattern {pattern:?}: {e}"))
            })?;
        }
        Ok(())
    }
}

/// Structural record for one article: network stats, metadata, census.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArticleStructure {
    pub article_id: String,
    pub title: String,
    pub label: Label,
    pub nodes: usize,
    pub edges: usize,
    pub density: f64,
    pub editor_count: usize,
    pub age_days: f64,
    pub edit_rate: f64,
    pub age_zero: bool,
    pub census: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
enum StageEntry {
    Ok(Box<ArticleStructure>),
    Failed { article_id: String, error: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SrpRecord {
    article_id: String,
    /// None when the network is too small for motif analysis.
    profile: Option<SrpProfile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExclusionEntry {
    pub article_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureEntry {
    pub article_id: String,
    pub error: String,
}

/// Run manifest: everything needed to reproduce or audit a run. Every input
/// article lands in exactly one of processed / excluded / failed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub fixture: String,
    pub seed: u64,
    pub null_samples: usize,
    pub epsilon: f64,
    pub cutoff: f64,
    pub pca_k: usize,
    pub bot_filter: Option<String>,
    pub standardize: bool,
    pub config_hash: String,
    pub articles_total: usize,
    pub processed: Vec<String>,
    pub excluded: Vec<ExclusionEntry>,
    pub failed: Vec<FailureEntry>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub articles_total: usize,
    pub processed: usize,
    pub excluded: usize,
    pub failed: usize,
    pub out_dir: PathBuf,
}

fn hex(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

fn sha_hex(parts: &[&[u8]]) -> String {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part);
        hasher.update([0u8]);
    }
    hex(&hasher.finalize())
}

/// Ensemble seed for one article: the run seed mixed with a digest of the
/// article id, so per-article streams are stable under reordering.
pub fn article_seed(root: u64, article_id: &str) -> u64 {
    let digest = Sha256::digest(article_id.as_bytes());
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    crate::nullmodel::split_seed(root ^ u64::from_le_bytes(first), 0)
}

fn run_in_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Precondition(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(job))
}

fn load_cache<T: serde::de::DeserializeOwned>(path: &Path) -> Option<T> {
    let bytes = fs::read(path).ok()?;
    serde_json::from_slice(&bytes).ok()
}

fn store_cache<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let bytes = serde_json::to_vec(value)
        .map_err(|e| Error::Numerical(format!("cache serialization: {e}")))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn stage_structure(logs: &[RevisionLog], bot_filter: Option<&Regex>) -> Vec<StageEntry> {
    logs.par_iter()
        .map(|raw| {
            let log = match bot_filter {
                Some(re) => raw.without_editors(re),
                None => raw.clone(),
            };
            match build_structure(&log) {
                Ok(structure) => StageEntry::Ok(Box::new(structure)),
                Err(e) => StageEntry::Failed {
                    article_id: raw.article_id.clone(),
                    error: e.to_string(),
                },
            }
        })
        .collect()
}

fn build_structure(log: &RevisionLog) -> Result<ArticleStructure> {
    let net = build_revision_network(log)?;
    let meta = compute_metadata(log, log.fetched_at)?;
    let census = triad_census(&net);
    Ok(ArticleStructure {
        article_id: log.article_id.clone(),
        title: log.title.clone(),
        label: log.label,
        nodes: net.node_count(),
        edges: net.edge_count(),
        density: net.density(),
        editor_count: meta.editor_count,
        age_days: meta.age_days,
        edit_rate: meta.edit_rate,
        age_zero: meta.age_zero,
        census: census.counts().to_vec(),
    })
}

fn stage_srp(entries: &[StageEntry], null: &NullModelConfig) -> Result<Vec<SrpRecord>> {
    entries
        .par_iter()
        .filter_map(|entry| match entry {
            StageEntry::Ok(s) => Some(s),
            StageEntry::Failed { .. } => None,
        })
        .map(|s| {
            if s.nodes < 3 {
                return Ok(SrpRecord {
                    article_id: s.article_id.clone(),
                    profile: None,
                });
            }
            let config = NullModelConfig {
                seed: article_seed(null.seed, &s.article_id),
                ..*null
            };
            let stats = ensemble_census(s.nodes, s.edges, &config)?;
            let mut real = [0u64; 13];
            real.copy_from_slice(&s.census[3..16]);
            let delta = compute_delta(&real, &stats.mean, config.epsilon)?;
            Ok(SrpRecord {
                article_id: s.article_id.clone(),
                profile: Some(normalize_srp(&delta)),
            })
        })
        .collect()
}

pub(crate) struct GroupAnalysis {
    pub motifs: Option<MotifReport>,
    pub pairwise: Option<PearsonSummary>,
}

pub(crate) struct AnalysisOutput {
    pub matrix: SrpMatrix,
    pub pca: Option<PcaResult>,
    pub projections: Vec<Projection>,
    pub correlates: Option<CorrelateReport>,
    pub controversial: GroupAnalysis,
    pub non_controversial: GroupAnalysis,
    pub all: GroupAnalysis,
}

fn analyze_group(matrix: &SrpMatrix, label: Option<Label>, cutoff: f64) -> GroupAnalysis {
    let profiles: Vec<SrpProfile> = matrix
        .filtered(label)
        .iter()
        .map(|r| SrpProfile::from_parts(r.values, false))
        .collect();
    GroupAnalysis {
        motifs: significant_motifs(&profiles, cutoff).ok(),
        pairwise: pairwise_pearson(matrix, label).ok(),
    }
}

/// Run the full pipeline and write the report bundle into `out_dir`.
pub fn cmd_run(config: &PipelineConfig) -> Result<RunSummary> {
    config.validate()?;
    let fixture_bytes =
        fs::read(&config.fixture).map_err(|e| Error::io(&config.fixture, e).in_stage("ingest"))?;
    let logs = load_fixtures(&config.fixture).map_err(|e| e.in_stage("ingest"))?;
    fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;

    let bot_filter = config
        .bot_filter
        .as_deref()
        .map(Regex::new)
        .transpose()
        .expect("pattern validated");

    let structure_key = sha_hex(&[
        b"structure-v1",
        &fixture_bytes,
        config.bot_filter.as_deref().unwrap_or("").as_bytes(),
    ]);
    let srp_key = sha_hex(&[
        b"srp-v1",
        structure_key.as_bytes(),
        &config.null.seed.to_le_bytes(),
        &config.null.samples.to_le_bytes(),
        &config.null.epsilon.to_le_bytes(),
    ]);
    let cache_dir = config.out_dir.join(".cache");
    let structure_path = cache_dir.join(format!("structure-{structure_key}.json"));
    let srp_path = cache_dir.join(format!("srp-{srp_key}.json"));

    let (entries, srp_records) = run_in_pool(config.workers, || -> Result<_> {
        let entries: Vec<StageEntry> = match load_cache(&structure_path) {
            Some(cached) => cached,
            None => {
                let computed = stage_structure(&logs, bot_filter.as_ref());
                store_cache(&structure_path, &computed).map_err(|e| e.in_stage("structure"))?;
                computed
            }
        };
        let srp_records: Vec<SrpRecord> = match load_cache(&srp_path) {
            Some(cached) => cached,
            None => {
                let computed =
                    stage_srp(&entries, &config.null).map_err(|e| e.in_stage("profiles"))?;
                store_cache(&srp_path, &computed).map_err(|e| e.in_stage("profiles"))?;
                computed
            }
        };
        Ok((entries, srp_records))
    })??;

    // partition articles, preserving fixture order
    let srp_by_id: HashMap<&str, &SrpRecord> = srp_records
        .iter()
        .map(|r| (r.article_id.as_str(), r))
        .collect();
    let mut processed: Vec<String> = Vec::new();
    let mut excluded: Vec<ExclusionEntry> = Vec::new();
    let mut failed: Vec<FailureEntry> = Vec::new();
    let mut structures: Vec<&ArticleStructure> = Vec::new();
    let mut profile_rows: Vec<(&ArticleStructure, &SrpProfile)> = Vec::new();

    for entry in &entries {
        match entry {
            StageEntry::Failed { article_id, error } => failed.push(FailureEntry {
                article_id: article_id.clone(),
                error: error.clone(),
            }),
            StageEntry::Ok(s) => {
                structures.push(s);
                let record = srp_by_id
                    .get(s.article_id.as_str())
                    .ok_or_else(|| Error::Numerical("stale SRP cache: id mismatch".into()))?;
                match &record.profile {
                    None => excluded.push(ExclusionEntry {
                        article_id: s.article_id.clone(),
                        reason: format!(
                            "insufficient for motif analysis ({} node(s) < 3)",
                            s.nodes
                        ),
                    }),
                    Some(profile) if profile.is_degenerate() => {
                        profile_rows.push((s, profile));
                        excluded.push(ExclusionEntry {
                            article_id: s.article_id.clone(),
                            reason: "degenerate profile (delta = 0)".into(),
                        });
                    }
                    Some(profile) => {
                        profile_rows.push((s, profile));
                        processed.push(s.article_id.clone());
                    }
                }
            }
        }
    }

    // analysis over the non-degenerate matrix
    let (matrix, _) = SrpMatrix::from_profiles(
        profile_rows
            .iter()
            .map(|(s, p)| (s.article_id.as_str(), s.label, *p)),
    );
    let pca = if matrix.len() >= 2 {
        let fit = if config.standardize {
            pca_fit_standardized(&matrix)
        } else {
            pca_fit(&matrix)
        };
        match fit {
            Ok(result) => Some(result),
            Err(Error::Numerical(msg)) => {
                // identical profiles: report an empty fit rather than abort the run
                eprintln!("pca skipped: {msg}");
                None
            }
            Err(e) => return Err(e.in_stage("analysis")),
        }
    } else {
        None
    };
    let projections = match &pca {
        Some(result) => {
            pca_project(result, &matrix, config.pca_k).map_err(|e| e.in_stage("analysis"))?
        }
        None => Vec::new(),
    };
    let metadata_by_id: HashMap<String, ArticleMetadata> = structures
        .iter()
        .map(|s| {
            (
                s.article_id.clone(),
                ArticleMetadata {
                    editor_count: s.editor_count,
                    age_days: s.age_days,
                    edit_rate: s.edit_rate,
                    age_zero: s.age_zero,
                },
            )
        })
        .collect();
    let correlates = if projections.is_empty() {
        None
    } else {
        Some(external_correlates(&projections, &metadata_by_id))
    };

    let analysis = AnalysisOutput {
        pca,
        projections,
        correlates,
        controversial: analyze_group(&matrix, Some(Label::Controversial), config.cutoff),
        non_controversial: analyze_group(&matrix, Some(Label::NonControversial), config.cutoff),
        all: analyze_group(&matrix, None, config.cutoff),
        matrix,
    };

    let manifest = RunManifest {
        tool: "revmotif".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        fixture: config.fixture.display().to_string(),
        seed: config.null.seed,
        null_samples: config.null.samples,
        epsilon: config.null.epsilon,
        cutoff: config.cutoff,
        pca_k: config.pca_k,
        bot_filter: config.bot_filter.clone(),
        standardize: config.standardize,
        config_hash: srp_key.clone(),
        articles_total: logs.len(),
        processed,
        excluded,
        failed,
    };

    outputs::write_bundle(
        &config.out_dir,
        &structures,
        &profile_rows,
        &analysis,
        &manifest,
        config,
    )
    .map_err(|e| e.in_stage("report"))?;

    Ok(RunSummary {
        articles_total: manifest.articles_total,
        processed: manifest.processed.len(),
        excluded: manifest.excluded.len(),
        failed: manifest.failed.len(),
        out_dir: config.out_dir.clone(),
    })
}

#[derive(Debug, Clone)]
pub struct FetchConfig {
    pub titles: PathBuf,
    pub out: PathBuf,
    pub client: WikiClientConfig,
    pub workers: usize,
}

#[derive(Debug, Clone)]
pub struct FetchSummary {
    pub fetched: usize,
    pub skipped: usize,
    pub failed: Vec<(String, String)>,
}

fn parse_titles_file(path: &Path) -> Result<Vec<(String, Label)>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut titles = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (title, label) = match line.split_once('\t') {
            None => (line.to_owned(), Label::NonControversial),
            Some((t, l)) => {
                let label = Label::parse(l.trim()).ok_or_else(|| Error::Parse {
                    input: path.display().to_string(),
                    line: i + 1,
                    message: format!(
                        "unknown label {:?} (expected controversial or non_controversial)",
                        l.trim()
                    ),
                })?;
                (t.trim().to_owned(), label)
            }
        };
        if seen.insert(title.clone()) {
            titles.push((title, label));
        }
    }
    Ok(titles)
}

fn checkpoint_path(out: &Path) -> PathBuf {
    let mut os = out.as_os_str().to_owned();
    os.push(".checkpoint");
    PathBuf::from(os)
}

/// Batch-fetch revision histories into a fixture file, checkpointing each
/// completed title so an interrupted run resumes where it stopped.
pub fn cmd_fetch(config: &FetchConfig) -> Result<FetchSummary> {
    let titles = parse_titles_file(&config.titles)?;
    if titles.is_empty() {
        return Err(Error::Precondition(format!(
            "no input titles in {}",
            config.titles.display()
        )));
    }
    let checkpoint = checkpoint_path(&config.out);
    let completed: HashSet<String> = match fs::read_to_string(&checkpoint) {
        Ok(text) => text.lines().map(str::to_owned).collect(),
        Err(_) => HashSet::new(),
    };
    // ids already in the fixture, so redirects resolving to the same page
    // do not produce duplicate lines
    let mut written_ids: HashSet<String> = HashSet::new();
    if config.out.exists() {
        for log in load_fixtures(&config.out)? {
            written_ids.insert(log.article_id);
        }
    }

    let pending: VecDeque<(String, Label)> = titles
        .iter()
        .filter(|(t, _)| !completed.contains(t))
        .cloned()
        .collect();
    let skipped = titles.len() - pending.len();
    if pending.is_empty() {
        return Ok(FetchSummary {
            fetched: 0,
            skipped,
            failed: Vec::new(),
        });
    }

    let client = WikiClient::new(config.client.clone())?;
    let fixture_file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&config.out)
        .map_err(|e| Error::io(&config.out, e))?;
    let checkpoint_file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&checkpoint)
        .map_err(|e| Error::io(&checkpoint, e))?;

    struct Shared {
        queue: VecDeque<(String, Label)>,
        fixture: fs::File,
        checkpoint: fs::File,
        written_ids: HashSet<String>,
        fetched: usize,
        failed: Vec<(String, String)>,
    }
    let shared = Mutex::new(Shared {
        queue: pending,
        fixture: fixture_file,
        checkpoint: checkpoint_file,
        written_ids,
        fetched: 0,
        failed: Vec::new(),
    });

    let workers = config.workers.max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let job = shared.lock().unwrap().queue.pop_front();
                let Some((title, label)) = job else { break };
                match client.fetch_revisions(&title) {
                    Ok(mut log) => {
                        log.label = label;
                        let mut guard = shared.lock().unwrap();
                        if guard.written_ids.insert(log.article_id.clone()) {
                            if let Err(e) = append_article(&mut guard.fixture, &log)
                                .and_then(|_| append_line(&mut guard.checkpoint, &title))
                            {
                                guard.failed.push((title.clone(), e.to_string()));
                                continue;
                            }
                            guard.fetched += 1;
                        } else {
                            // same page under another title: checkpoint only
                            if let Err(e) = append_line(&mut guard.checkpoint, &title) {
                                guard.failed.push((title.clone(), e.to_string()));
                                continue;
                            }
                            guard.fetched += 1;
                        }
                    }
                    Err(e) => {
                        let mut guard = shared.lock().unwrap();
                        guard.failed.push((title.clone(), e.to_string()));
                    }
                }
            });
        }
    });

    let shared = shared.into_inner().unwrap();
    Ok(FetchSummary {
        fetched: shared.fetched,
        skipped,
        failed: shared.failed,
    })
}

fn append_article(file: &mut fs::File, log: &RevisionLog) -> Result<()> {
    let line = serde_json::to_string(log)
        .map_err(|e| Error::Numerical(format!("fixture serialization: {e}")))?;
    file.write_all(line.as_bytes())
        .and_then(|_| file.write_all(b"\n"))
        .and_then(|_| file.flush())
        .map_err(|e| Error::io("<fixture>", e))
}

fn append_line(file: &mut fs::File, line: &str) -> Result<()> {
    file.write_all(line.as_bytes())
        .and_then(|_| file.write_all(b"\n"))
        .and_then(|_| file.flush())
        .map_err(|e| Error::io("<checkpoint>", e))
}
