//! Collection-level analysis of subgraph ratio profiles: PCA, pairwise
//! profile correlation, and correlation against external article variables.

mod correlate;
mod pca;

pub use correlate::{
    external_correlates, pairwise_pearson, pearson, BinnedRow, CorrelateReport, CorrelateRow,
    Covariate, PearsonSummary,
};
pub use pca::{pca_fit, pca_fit_standardized, pca_project, PcaResult, Projection};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Label;
use crate::srp::SrpProfile;

pub const SRP_DIM: usize = 13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrpRow {
    pub article_id: String,
    pub label: Label,
    pub values: [f64; SRP_DIM],
}

/// Profile matrix for analysis. Degenerate profiles are never admitted.
#[derive(Debug, Clone, Default)]
pub struct SrpMatrix {
    rows: Vec<SrpRow>,
}

impl SrpMatrix {
    pub fn new() -> Self {
        SrpMatrix::default()
    }

    pub fn push(&mut self, article_id: &str, label: Label, profile: &SrpProfile) -> Result<()> {
        if profile.is_degenerate() {
            return Err(Error::Precondition(format!(
                "degenerate profile for {article_id:?} cannot enter the analysis matrix"
            )));
        }
        self.rows.push(SrpRow {
            article_id: article_id.to_owned(),
            label,
            values: *profile.values(),
        });
        Ok(())
    }

    /// Build from labeled profiles, silently dropping degenerate ones;
    /// returns the matrix and the ids that were skipped.
    pub fn from_profiles<'a, I>(items: I) -> (Self, Vec<String>)
    where
        I: IntoIterator<Item = (&'a str, Label, &'a SrpProfile)>,
    {
        let mut matrix = SrpMatrix::new();
        let mut skipped = Vec::new();
        for (id, label, profile) in items {
            if profile.is_degenerate() {
                skipped.push(id.to_owned());
            } else {
                matrix
                    .push(id, label, profile)
                    .expect("non-degenerate by check");
            }
        }
        (matrix, skipped)
    }

    pub fn rows(&self) -> &[SrpRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows restricted to one label, or all rows when `label` is None.
    pub fn filtered(&self, label: Option<Label>) -> Vec<&SrpRow> {
        self.rows
            .iter()
            .filter(|r| label.is_none_or(|l| r.label == l))
            .collect()
    }
}
