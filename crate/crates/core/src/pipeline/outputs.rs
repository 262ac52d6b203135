//! Report-bundle writers and readers.
//!
//! Everything is written in fixture order with default float formatting
//! (shortest round-trip), so a re-run with the same inputs produces
//! byte-identical files.

use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{AnalysisOutput, ArticleStructure, GroupAnalysis, PipelineConfig, RunManifest};
use crate::analysis::Projection;
use crate::census::TriadClass;
use crate::error::{Error, Result};
use crate::ingest::{ArticleMetadata, Label};
use crate::srp::{MotifReport, SrpProfile};

pub const CENSUS_CSV: &str = "census.csv";
pub const METADATA_CSV: &str = "metadata.csv";
pub const SRP_CSV: &str = "srp.csv";
pub const MOTIFS_JSON: &str = "motifs.json";
pub const PCA_JSON: &str = "pca.json";
pub const PROJECTION_CSV: &str = "projection.csv";
pub const CORRELATES_CSV: &str = "correlates.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Parse {
        input: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Numerical(format!("report serialization: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(super) fn write_bundle(
    out_dir: &Path,
    structures: &[&ArticleStructure],
    profiles: &[(&ArticleStructure, &SrpProfile)],
    analysis: &AnalysisOutput,
    manifest: &RunManifest,
    config: &PipelineConfig,
) -> Result<()> {
    write_census_csv(&out_dir.join(CENSUS_CSV), structures)?;
    write_metadata_csv(&out_dir.join(METADATA_CSV), structures)?;
    write_srp_csv(&out_dir.join(SRP_CSV), profiles)?;
    write_motifs_json(&out_dir.join(MOTIFS_JSON), analysis, config.cutoff)?;
    write_pca_json(&out_dir.join(PCA_JSON), analysis, config.standardize)?;
    write_projection_csv(
        &out_dir.join(PROJECTION_CSV),
        &analysis.projections,
        config.pca_k,
    )?;
    write_correlates_csv(&out_dir.join(CORRELATES_CSV), analysis)?;
    write_json(&out_dir.join(MANIFEST_JSON), manifest)
}

fn write_census_csv(path: &Path, structures: &[&ArticleStructure]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["article_id".to_owned()];
    header.extend(TriadClass::ALL.iter().map(|c| c.code().to_owned()));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for s in structures {
        let mut record = vec![s.article_id.clone()];
        record.extend(s.census.iter().map(|c| c.to_string()));
        w.write_record(&record).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_metadata_csv(path: &Path, structures: &[&ArticleStructure]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "article_id",
        "label",
        "editor_count",
        "age_days",
        "edit_rate",
        "age_zero",
        "nodes",
        "edges",
        "density",
    ])
    .map_err(|e| csv_err(path, e))?;
    for s in structures {
        w.write_record([
            s.article_id.as_str(),
            s.label.as_str(),
            &s.editor_count.to_string(),
            &s.age_days.to_string(),
            &s.edit_rate.to_string(),
            &s.age_zero.to_string(),
            &s.nodes.to_string(),
            &s.edges.to_string(),
            &s.density.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_srp_csv(path: &Path, profiles: &[(&ArticleStructure, &SrpProfile)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["article_id".to_owned(), "label".to_owned()];
    header.extend(TriadClass::CONNECTED.iter().map(|c| c.code().to_owned()));
    header.push("degenerate".to_owned());
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for (s, profile) in profiles {
        let mut record = vec![s.article_id.clone(), s.label.as_str().to_owned()];
        record.extend(profile.values().iter().map(|v| v.to_string()));
        record.push(profile.is_degenerate().to_string());
        w.write_record(&record).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct GroupReport {
    profiles: usize,
    motifs: Option<MotifReport>,
    pairwise: Option<crate::analysis::PearsonSummary>,
}

#[derive(Serialize)]
struct MotifBundle {
    cutoff: f64,
    controversial: GroupReport,
    non_controversial: GroupReport,
    all: GroupReport,
}

fn group_report(group: &GroupAnalysis) -> GroupReport {
    GroupReport {
        profiles: group.motifs.as_ref().map(|m| m.profiles_used).unwrap_or(0),
        motifs: group.motifs.clone(),
        pairwise: group.pairwise.clone(),
    }
}

fn write_motifs_json(path: &Path, analysis: &AnalysisOutput, cutoff: f64) -> Result<()> {
    let bundle = MotifBundle {
        cutoff,
        controversial: group_report(&analysis.controversial),
        non_controversial: group_report(&analysis.non_controversial),
        all: group_report(&analysis.all),
    };
    write_json(path, &bundle)
}

#[derive(Serialize)]
struct ComponentReport {
    component: usize,
    eigenvalue: f64,
    explained_variance: f64,
    explained_variance_pct: f64,
    loadings: Vec<f64>,
}

#[derive(Serialize)]
struct PcaReport {
    rows: usize,
    standardized: bool,
    classes: Vec<&'static str>,
    mean: Option<Vec<f64>>,
    components: Vec<ComponentReport>,
    note: Option<String>,
}

fn write_pca_json(path: &Path, analysis: &AnalysisOutput, standardized: bool) -> Result<()> {
    let classes: Vec<&'static str> = TriadClass::CONNECTED.iter().map(|c| c.code()).collect();
    let report = match &analysis.pca {
        Some(result) => PcaReport {
            rows: analysis.matrix.len(),
            standardized,
            classes,
            mean: Some(result.mean.to_vec()),
            components: result
                .components
                .iter()
                .enumerate()
                .map(|(i, loadings)| ComponentReport {
                    component: i + 1,
                    eigenvalue: result.eigenvalues[i],
                    explained_variance: result.explained_variance[i],
                    explained_variance_pct: result.explained_variance[i] * 100.0,
                    loadings: loadings.to_vec(),
                })
                .collect(),
            note: None,
        },
        None => PcaReport {
            rows: analysis.matrix.len(),
            standardized,
            classes,
            mean: None,
            components: Vec::new(),
            note: Some("insufficient non-degenerate profiles for PCA".to_owned()),
        },
    };
    write_json(path, &report)
}

fn write_projection_csv(path: &Path, projections: &[Projection], k: usize) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["article_id".to_owned(), "label".to_owned()];
    for i in 1..=k {
        header.push(format!("pc{i}"));
    }
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for p in projections {
        let mut record = vec![p.article_id.clone(), p.label.as_str().to_owned()];
        record.extend(p.coords.iter().map(|c| c.to_string()));
        w.write_record(&record).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_correlates_csv(path: &Path, analysis: &AnalysisOutput) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["group", "component", "covariate", "r", "n", "note"])
        .map_err(|e| csv_err(path, e))?;
    if let Some(report) = &analysis.correlates {
        for row in &report.rows {
            w.write_record([
                row.group.as_str(),
                &row.component.to_string(),
                row.covariate.name(),
                &row.r.map(|r| r.to_string()).unwrap_or_default(),
                &row.n.to_string(),
                row.note.as_deref().unwrap_or(""),
            ])
            .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

// readers used by plotdata and tests

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file))
}

fn parse_label(raw: &str, path: &Path, line: usize) -> Result<Label> {
    Label::parse(raw).ok_or_else(|| Error::Parse {
        input: path.display().to_string(),
        line,
        message: format!("unknown label {raw:?}"),
    })
}

fn field_f64(raw: &str, path: &Path, line: usize, name: &str) -> Result<f64> {
    raw.parse().map_err(|_| Error::Parse {
        input: path.display().to_string(),
        line,
        message: format!("{name}: not a number: {raw:?}"),
    })
}

#[derive(Debug, Clone)]
pub struct SrpCsvRow {
    pub article_id: String,
    pub label: Label,
    pub values: [f64; 13],
    pub degenerate: bool,
}

pub fn read_srp_csv(path: &Path) -> Result<Vec<SrpCsvRow>> {
    let mut reader = csv_reader(path)?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = i + 2;
        if record.len() != 16 {
            return Err(Error::Parse {
                input: path.display().to_string(),
                line,
                message: format!("expected 16 fields, got {}", record.len()),
            });
        }
        let mut values = [0.0f64; 13];
        for (j, v) in values.iter_mut().enumerate() {
            *v = field_f64(&record[2 + j], path, line, "srp value")?;
        }
        rows.push(SrpCsvRow {
            article_id: record[0].to_owned(),
            label: parse_label(&record[1], path, line)?,
            values,
            degenerate: &record[15] == "true",
        });
    }
    Ok(rows)
}

pub fn read_projection_csv(path: &Path) -> Result<Vec<Projection>> {
    let mut reader = csv_reader(path)?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = i + 2;
        let mut coords = Vec::new();
        for j in 2..record.len() {
            coords.push(field_f64(&record[j], path, line, "coordinate")?);
        }
        rows.push(Projection {
            article_id: record[0].to_owned(),
            label: parse_label(&record[1], path, line)?,
            coords,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct MetadataCsvRow {
    pub article_id: String,
    pub label: Label,
    pub metadata: ArticleMetadata,
    pub nodes: usize,
    pub edges: usize,
    pub density: f64,
}

pub fn read_metadata_csv(path: &Path) -> Result<Vec<MetadataCsvRow>> {
    let mut reader = csv_reader(path)?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = i + 2;
        rows.push(MetadataCsvRow {
            article_id: record[0].to_owned(),
            label: parse_label(&record[1], path, line)?,
            metadata: ArticleMetadata {
                editor_count: field_f64(&record[2], path, line, "editor_count")? as usize,
                age_days: field_f64(&record[3], path, line, "age_days")?,
                edit_rate: field_f64(&record[4], path, line, "edit_rate")?,
                age_zero: &record[5] == "true",
            },
            nodes: field_f64(&record[6], path, line, "nodes")? as usize,
            edges: field_f64(&record[7], path, line, "edges")? as usize,
            density: field_f64(&record[8], path, line, "density")?,
        });
    }
    Ok(rows)
}
