//! Tidy plot-ready CSV emission from a finished report bundle. Rendering is
//! left to external tools; these are the data files behind the profile
//! overlays, PCA scatters, and component-vs-covariate figures.

use std::io::Write;
use std::path::Path;

use super::outputs::{
    read_metadata_csv, read_projection_csv, read_srp_csv, METADATA_CSV, PROJECTION_CSV, SRP_CSV,
};
use crate::census::TriadClass;
use crate::error::{Error, Result};

pub const FIGURES: [&str; 6] = [
    "srp_profiles",
    "pca2d",
    "pca3d",
    "pc_vs_nodes",
    "pc_vs_age",
    "pc_vs_editrate",
];

/// Emit one figure's tidy CSV from the bundle in `bundle_dir`.
pub fn cmd_plotdata(bundle_dir: &Path, figure: &str, out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match figure {
        "srp_profiles" => srp_profiles(bundle_dir, &mut w)?,
        "pca2d" => pca_scatter(bundle_dir, 2, &mut w)?,
        "pca3d" => pca_scatter(bundle_dir, 3, &mut w)?,
        "pc_vs_nodes" => covariate_scatter(bundle_dir, "nodes", &mut w)?,
        "pc_vs_age" => covariate_scatter(bundle_dir, "age_days", &mut w)?,
        "pc_vs_editrate" => covariate_scatter(bundle_dir, "edit_rate", &mut w)?,
        other => {
            return Err(Error::UnknownFigure {
                name: other.to_owned(),
                valid: FIGURES.join(", "),
            })
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Numerical(format!("csv buffer: {e}")))?;
    out.write_all(&bytes)
        .map_err(|e| Error::io("<plotdata output>", e))
}

type W = csv::Writer<Vec<u8>>;

fn csv_err(e: csv::Error) -> Error {
    Error::Parse {
        input: "<plotdata>".into(),
        line: 0,
        message: e.to_string(),
    }
}

/// 13 rows per non-degenerate article, keyed by class code.
fn srp_profiles(bundle_dir: &Path, w: &mut W) -> Result<()> {
    let rows = read_srp_csv(&bundle_dir.join(SRP_CSV))?;
    w.write_record(["article_id", "label", "class", "value"])
        .map_err(csv_err)?;
    for row in rows.iter().filter(|r| !r.degenerate) {
        for (class, value) in TriadClass::CONNECTED.iter().zip(row.values) {
            w.write_record([
                row.article_id.as_str(),
                row.label.as_str(),
                class.code(),
                &value.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    Ok(())
}

fn pca_scatter(bundle_dir: &Path, k: usize, w: &mut W) -> Result<()> {
    let rows = read_projection_csv(&bundle_dir.join(PROJECTION_CSV))?;
    if let Some(first) = rows.first() {
        if first.coords.len() < k {
            return Err(Error::Precondition(format!(
                "bundle projection has {} component(s); re-run with --pca-k {k}",
                first.coords.len()
            )));
        }
    }
    let mut header = vec!["article_id".to_owned(), "label".to_owned()];
    for i in 1..=k {
        header.push(format!("pc{i}"));
    }
    w.write_record(&header).map_err(csv_err)?;
    for row in &rows {
        let mut record = vec![row.article_id.clone(), row.label.as_str().to_owned()];
        record.extend(row.coords[..k].iter().map(|c| c.to_string()));
        w.write_record(&record).map_err(csv_err)?;
    }
    Ok(())
}

/// Long-form join of component coordinates with one metadata covariate.
fn covariate_scatter(bundle_dir: &Path, covariate: &str, w: &mut W) -> Result<()> {
    let projections = read_projection_csv(&bundle_dir.join(PROJECTION_CSV))?;
    let metadata = read_metadata_csv(&bundle_dir.join(METADATA_CSV))?;
    let by_id: std::collections::HashMap<&str, &super::outputs::MetadataCsvRow> = metadata
        .iter()
        .map(|m| (m.article_id.as_str(), m))
        .collect();
    w.write_record(["article_id", "label", "component", "coordinate", covariate])
        .map_err(csv_err)?;
    for p in &projections {
        let Some(meta) = by_id.get(p.article_id.as_str()) else {
            continue;
        };
        let value = match covariate {
            "nodes" => meta.nodes as f64,
            "age_days" => meta.metadata.age_days,
            "edit_rate" => meta.metadata.edit_rate,
            _ => unreachable!("figure names are fixed"),
        };
        for (i, coord) in p.coords.iter().enumerate() {
            w.write_record([
                p.article_id.as_str(),
                p.label.as_str(),
                &format!("pc{}", i + 1),
                &coord.to_string(),
                &value.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    Ok(())
}
