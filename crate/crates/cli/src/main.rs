//! Command-line front end for the revision-network motif pipeline.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use revmotif_core::census::{triad_census, TriadClass};
use revmotif_core::error::{Error, ErrorKind};
use revmotif_core::graph::build_revision_network;
use revmotif_core::ingest::{load_fixtures, RevisionLog, WikiClientConfig};
use revmotif_core::nullmodel::{NullModelConfig, DEFAULT_EPSILON, DEFAULT_SAMPLES};
use revmotif_core::pipeline::{
    article_seed, cmd_fetch, cmd_plotdata, cmd_run, FetchConfig, PipelineConfig, DEFAULT_CUTOFF,
    DEFAULT_PCA_K,
};
use revmotif_core::srp::article_srp;

#[derive(Parser)]
#[command(
    name = "revmotif",
    version,
    about = "Revision networks, triad censuses, subgraph ratio profiles, and profile analytics"
)]
struct Cli {
    /// TOML config file; command-line flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Root seed for all randomness in the run
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Random graphs per null-model ensemble
    #[arg(long, global = true, value_name = "N")]
    null_samples: Option<usize>,

    /// Damping constant in the relative-abundance denominator
    #[arg(long, global = true)]
    epsilon: Option<f64>,

    /// Motif significance cutoff on mean profile scores
    #[arg(long, global = true)]
    cutoff: Option<f64>,

    /// Principal components to project onto (2 or 3)
    #[arg(long, global = true)]
    pca_k: Option<usize>,

    /// Worker threads (0 = one per core)
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output directory (run) or file (fetch, plotdata, census, srp)
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fetch revision histories for a titles file into a JSONL fixture
    Fetch {
        /// One `title<TAB>label` per line; label defaults to non_controversial
        #[arg(long, value_name = "FILE")]
        titles: PathBuf,
        /// Override the API endpoint (or set REVMOTIF_ENDPOINT)
        #[arg(long)]
        endpoint: Option<String>,
        /// Revisions per API request
        #[arg(long)]
        batch_limit: Option<u32>,
        /// Minimum milliseconds between requests to the endpoint
        #[arg(long)]
        politeness_ms: Option<u64>,
    },
    /// Run the full pipeline on a fixture and write the report bundle
    Run {
        #[arg(long, value_name = "FILE")]
        fixture: PathBuf,
        /// Drop editors matching this regex before building networks
        #[arg(long)]
        bot_filter: Option<String>,
        /// PCA on the correlation matrix instead of the covariance matrix
        #[arg(long)]
        standardize: bool,
    },
    /// Emit plot-ready CSV for one figure from a report bundle
    Plotdata {
        #[arg(long, value_name = "DIR")]
        bundle: PathBuf,
        /// One of: srp_profiles, pca2d, pca3d, pc_vs_nodes, pc_vs_age, pc_vs_editrate
        #[arg(long)]
        figure: String,
    },
    /// Census one article (or all) from a fixture as CSV rows
    Census {
        #[arg(long, value_name = "FILE")]
        fixture: PathBuf,
        /// Restrict to a single article id
        #[arg(long)]
        article: Option<String>,
        /// Also export the selected article's edge list (src<TAB>dst)
        #[arg(long, value_name = "FILE")]
        export_edges: Option<PathBuf>,
    },
    /// Profile one article from a fixture (debug view of the pipeline's SRP)
    Srp {
        #[arg(long, value_name = "FILE")]
        fixture: PathBuf,
        #[arg(long)]
        article: String,
    },
}

/// Optional file-based configuration, lowest precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    null_samples: Option<usize>,
    epsilon: Option<f64>,
    cutoff: Option<f64>,
    pca_k: Option<usize>,
    workers: Option<usize>,
    out: Option<PathBuf>,
    bot_filter: Option<String>,
    standardize: Option<bool>,
    endpoint: Option<String>,
    batch_limit: Option<u32>,
    politeness_ms: Option<u64>,
}

impl FileConfig {
    fn load(path: Option<&PathBuf>) -> Result<FileConfig, Error> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| Error::Precondition(format!("config {}: {e}", path.display())))
    }
}

struct Settings {
    cli: Cli,
    file: FileConfig,
}

impl Settings {
    fn null_config(&self) -> NullModelConfig {
        NullModelConfig {
            samples: self
                .cli
                .null_samples
                .or(self.file.null_samples)
                .unwrap_or(DEFAULT_SAMPLES),
            seed: self.cli.seed.or(self.file.seed).unwrap_or(0),
            epsilon: self
                .cli
                .epsilon
                .or(self.file.epsilon)
                .unwrap_or(DEFAULT_EPSILON),
        }
    }

    fn workers(&self) -> usize {
        self.cli.workers.or(self.file.workers).unwrap_or(0)
    }

    fn out(&self) -> Option<PathBuf> {
        self.cli.out.clone().or_else(|| self.file.out.clone())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as ClapKind;
            let code = match e.kind() {
                ClapKind::DisplayHelp | ClapKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Data => 2,
                ErrorKind::Numerical => 3,
            };
            ExitCode::from(code)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    let file = FileConfig::load(cli.config.as_ref())?;
    let settings = Settings { cli, file };
    match &settings.cli.command {
        Command::Fetch {
            titles,
            endpoint,
            batch_limit,
            politeness_ms,
        } => fetch(
            &settings,
            titles,
            endpoint.as_deref(),
            *batch_limit,
            *politeness_ms,
        ),
        Command::Run {
            fixture,
            bot_filter,
            standardize,
        } => run(&settings, fixture, bot_filter.clone(), *standardize),
        Command::Plotdata { bundle, figure } => plotdata(&settings, bundle, figure),
        Command::Census {
            fixture,
            article,
            export_edges,
        } => census(
            &settings,
            fixture,
            article.as_deref(),
            export_edges.as_deref(),
        ),
        Command::Srp { fixture, article } => srp(&settings, fixture, article),
    }
}

fn output_writer(out: Option<&PathBuf>) -> Result<Box<dyn Write>, Error> {
    match out {
        None => Ok(Box::new(std::io::stdout().lock())),
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| {
                Error::Precondition(format!("cannot create {}: {e}", path.display()))
            })?;
            Ok(Box::new(file))
        }
    }
}

fn fetch(
    settings: &Settings,
    titles: &Path,
    endpoint: Option<&str>,
    batch_limit: Option<u32>,
    politeness_ms: Option<u64>,
) -> Result<(), Error> {
    let out = settings.out().ok_or_else(|| {
        Error::Precondition(
            "fetch needs --out <fixture.jsonl> (or `out` in the config file)".into(),
        )
    })?;
    let mut client = WikiClientConfig::default();
    if let Some(endpoint) = endpoint.or(settings.file.endpoint.as_deref()) {
        client.endpoint = endpoint.to_owned();
    }
    client.batch_limit = batch_limit.or(settings.file.batch_limit).unwrap_or(500);
    client.politeness =
        Duration::from_millis(politeness_ms.or(settings.file.politeness_ms).unwrap_or(200));
    let summary = cmd_fetch(&FetchConfig {
        titles: titles.to_path_buf(),
        out,
        client,
        workers: settings.workers().max(1),
    })?;
    println!(
        "fetched {} article(s), skipped {} already checkpointed",
        summary.fetched, summary.skipped
    );
    if !summary.failed.is_empty() {
        for (title, error) in &summary.failed {
            eprintln!("failed: {title}: {error}");
        }
        return Err(Error::Transport {
            attempts: 0,
            message: format!(
                "{} title(s) failed; rerun to retry them",
                summary.failed.len()
            ),
        });
    }
    Ok(())
}

fn run(
    settings: &Settings,
    fixture: &Path,
    bot_filter: Option<String>,
    standardize: bool,
) -> Result<(), Error> {
    let out_dir = settings.out().ok_or_else(|| {
        Error::Precondition("run needs --out <directory> (or `out` in the config file)".into())
    })?;
    let config = PipelineConfig {
        fixture: fixture.to_path_buf(),
        out_dir,
        null: settings.null_config(),
        cutoff: settings
            .cli
            .cutoff
            .or(settings.file.cutoff)
            .unwrap_or(DEFAULT_CUTOFF),
        pca_k: settings
            .cli
            .pca_k
            .or(settings.file.pca_k)
            .unwrap_or(DEFAULT_PCA_K),
        workers: settings.workers(),
        bot_filter: bot_filter.or_else(|| settings.file.bot_filter.clone()),
        standardize: standardize || settings.file.standardize.unwrap_or(false),
    };
    let summary = cmd_run(&config)?;
    println!(
        "{} article(s): {} analyzed, {} excluded, {} failed -> {}",
        summary.articles_total,
        summary.processed,
        summary.excluded,
        summary.failed,
        summary.out_dir.display()
    );
    Ok(())
}

fn plotdata(settings: &Settings, bundle: &Path, figure: &str) -> Result<(), Error> {
    let mut out = output_writer(settings.out().as_ref())?;
    cmd_plotdata(bundle, figure, &mut out)
}

fn find_article<'a>(logs: &'a [RevisionLog], article: &str) -> Result<&'a RevisionLog, Error> {
    logs.iter()
        .find(|l| l.article_id == article || l.title == article)
        .ok_or_else(|| Error::ArticleNotFound(article.to_owned()))
}

fn census(
    settings: &Settings,
    fixture: &Path,
    article: Option<&str>,
    export_edges: Option<&std::path::Path>,
) -> Result<(), Error> {
    let logs = load_fixtures(fixture)?;
    let selected: Vec<&RevisionLog> = match article {
        Some(id) => vec![find_article(&logs, id)?],
        None => logs.iter().collect(),
    };
    let mut out = output_writer(settings.out().as_ref())?;
    let header: Vec<&str> = std::iter::once("article_id")
        .chain(TriadClass::ALL.iter().map(|c| c.code()))
        .collect();
    writeln!(out, "{}", header.join(",")).map_err(|e| Error::io("<census output>", e))?;
    for log in selected {
        let net = build_revision_network(log)?;
        let census = triad_census(&net);
        let counts: Vec<String> = census.counts().iter().map(|c| c.to_string()).collect();
        writeln!(out, "{},{}", log.article_id, counts.join(","))
            .map_err(|e| Error::io("<census output>", e))?;
        if let Some(path) = export_edges {
            let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
            net.write_edge_list(std::io::BufWriter::new(file))
                .map_err(|e| Error::io(path, e))?;
        }
    }
    Ok(())
}

fn srp(settings: &Settings, fixture: &Path, article: &str) -> Result<(), Error> {
    let logs = load_fixtures(fixture)?;
    let log = find_article(&logs, article)?;
    let net = build_revision_network(log)?;
    let null = settings.null_config();
    // same per-article stream the batch pipeline uses, so numbers line up
    let config = NullModelConfig {
        seed: article_seed(null.seed, &log.article_id),
        ..null
    };
    let profile = article_srp(&net, &config)?;
    let mut out = output_writer(settings.out().as_ref())?;
    let header: Vec<&str> = std::iter::once("article_id")
        .chain(TriadClass::CONNECTED.iter().map(|c| c.code()))
        .chain(std::iter::once("degenerate"))
        .collect();
    writeln!(out, "{}", header.join(",")).map_err(|e| Error::io("<srp output>", e))?;
    let values: Vec<String> = profile.values().iter().map(|v| v.to_string()).collect();
    writeln!(
        out,
        "{},{},{}",
        log.article_id,
        values.join(","),
        profile.is_degenerate()
    )
    .map_err(|e| Error::io("<srp output>", e))?;
    Ok(())
}
