//! Pearson statistics: pairwise profile similarity within label groups and
//! correlation of principal-component coordinates against external article
//! variables.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Projection, SrpMatrix};
use crate::error::{Error, Result};
use crate::ingest::{ArticleMetadata, Label};

/// Pearson correlation over paired samples; None when either side has zero
/// variance (the coefficient is undefined there).
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    if x.is_empty() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    // rounding can push |r| a hair past 1 on perfectly collinear input
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PearsonSummary {
    pub mean: f64,
    /// Population standard deviation of the pairwise coefficients.
    pub sd: f64,
    /// Distinct pairs that produced a coefficient.
    pub pairs: usize,
    /// Pairs skipped because one profile had zero variance across components.
    pub excluded_zero_variance: usize,
}

const PAIR_BLOCK: usize = 4096;

/// Mean and SD of the Pearson coefficient over every distinct pair of
/// profiles in a label group (all rows when `group` is None).
pub fn pairwise_pearson(matrix: &SrpMatrix, group: Option<Label>) -> Result<PearsonSummary> {
    let rows = matrix.filtered(group);
    if rows.len() < 2 {
        return Err(Error::Precondition(format!(
            "pairwise correlation needs at least 2 profiles in the group, got {}",
            rows.len()
        )));
    }
    let n = rows.len();
    let total_pairs = n * (n - 1) / 2;

    // blocks of lexicographic pair indices, reduced in block order so the
    // result does not depend on the worker count
    let block_count = total_pairs.div_ceil(PAIR_BLOCK);
    let partials: Vec<(f64, f64, usize, usize)> = (0..block_count)
        .into_par_iter()
        .map(|block| {
            let start = block * PAIR_BLOCK;
            let end = (start + PAIR_BLOCK).min(total_pairs);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let mut kept = 0usize;
            let mut excluded = 0usize;
            for flat in start..end {
                let (i, j) = unflatten_pair(flat, n);
                match pearson(&rows[i].values, &rows[j].values) {
                    Some(r) => {
                        sum += r;
                        sum_sq += r * r;
                        kept += 1;
                    }
                    None => excluded += 1,
                }
            }
            (sum, sum_sq, kept, excluded)
        })
        .collect();

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut kept = 0usize;
    let mut excluded = 0usize;
    for (s, sq, k, e) in partials {
        sum += s;
        sum_sq += sq;
        kept += k;
        excluded += e;
    }
    if kept == 0 {
        return Err(Error::Precondition(
            "every pair had a zero-variance profile".into(),
        ));
    }
    let mean = sum / kept as f64;
    let var = (sum_sq / kept as f64 - mean * mean).max(0.0);
    Ok(PearsonSummary {
        mean,
        sd: var.sqrt(),
        pairs: kept,
        excluded_zero_variance: excluded,
    })
}

/// Map a flat index in [0, n*(n-1)/2) to the pair (i, j), i < j, in
/// lexicographic order.
fn unflatten_pair(flat: usize, n: usize) -> (usize, usize) {
    // row i owns (n - 1 - i) pairs; walk rows (n is small enough that the
    // closed form is not worth the numeric care it needs)
    let mut i = 0usize;
    let mut remaining = flat;
    loop {
        let row_len = n - 1 - i;
        if remaining < row_len {
            return (i, i + 1 + remaining);
        }
        remaining -= row_len;
        i += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Covariate {
    EditorCount,
    AgeDays,
    EditRate,
}

impl Covariate {
    pub const ALL: [Covariate; 3] = [
        Covariate::EditorCount,
        Covariate::AgeDays,
        Covariate::EditRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Covariate::EditorCount => "editor_count",
            Covariate::AgeDays => "age_days",
            Covariate::EditRate => "edit_rate",
        }
    }

    fn extract(self, meta: &ArticleMetadata) -> f64 {
        match self {
            Covariate::EditorCount => meta.editor_count as f64,
            Covariate::AgeDays => meta.age_days,
            Covariate::EditRate => meta.edit_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelateRow {
    pub group: String,
    /// 1-based principal-component number.
    pub component: usize,
    pub covariate: Covariate,
    /// None when the covariate (or coordinate) has zero variance in the group.
    pub r: Option<f64>,
    pub n: usize,
    pub note: Option<String>,
}

/// Equal-count bin summary for scatter-style plots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedRow {
    pub group: String,
    pub component: usize,
    pub covariate: Covariate,
    pub bin: usize,
    pub covariate_mean: f64,
    pub coord_mean: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelateReport {
    pub rows: Vec<CorrelateRow>,
    pub binned: Vec<BinnedRow>,
    /// Article ids present in the projection but missing metadata.
    pub missing_metadata: Vec<String>,
}

const MAX_BINS: usize = 10;

fn group_name(label: Option<Label>) -> &'static str {
    match label {
        Some(Label::Controversial) => "controversial",
        Some(Label::NonControversial) => "non_controversial",
        None => "all",
    }
}

/// Correlate component coordinates with external variables, per label group
/// and per component. Articles without metadata are reported, not fatal.
pub fn external_correlates(
    projections: &[Projection],
    metadata: &HashMap<String, ArticleMetadata>,
) -> CorrelateReport {
    let mut missing_metadata = Vec::new();
    let mut usable: Vec<(&Projection, &ArticleMetadata)> = Vec::new();
    for p in projections {
        match metadata.get(&p.article_id) {
            Some(meta) => usable.push((p, meta)),
            None => missing_metadata.push(p.article_id.clone()),
        }
    }
    let k = usable.first().map_or(0, |(p, _)| p.coords.len());

    let mut rows = Vec::new();
    let mut binned = Vec::new();
    for group in [
        Some(Label::Controversial),
        Some(Label::NonControversial),
        None,
    ] {
        let members: Vec<&(&Projection, &ArticleMetadata)> = usable
            .iter()
            .filter(|(p, _)| group.is_none_or(|g| p.label == g))
            .collect();
        for component in 0..k {
            for covariate in Covariate::ALL {
                let coords: Vec<f64> = members.iter().map(|(p, _)| p.coords[component]).collect();
                let values: Vec<f64> = members.iter().map(|(_, m)| covariate.extract(m)).collect();
                let (r, note) = if coords.len() < 2 {
                    (None, Some("fewer than 2 articles in group".to_owned()))
                } else {
                    match pearson(&coords, &values) {
                        Some(r) => (Some(r), None),
                        None => (
                            None,
                            Some("zero-variance covariate or coordinate".to_owned()),
                        ),
                    }
                };
                rows.push(CorrelateRow {
                    group: group_name(group).to_owned(),
                    component: component + 1,
                    covariate,
                    r,
                    n: coords.len(),
                    note,
                });
                binned.extend(bin_rows(
                    group_name(group),
                    component + 1,
                    covariate,
                    &values,
                    &coords,
                ));
            }
        }
    }
    CorrelateReport {
        rows,
        binned,
        missing_metadata,
    }
}

fn bin_rows(
    group: &str,
    component: usize,
    covariate: Covariate,
    values: &[f64],
    coords: &[f64],
) -> Vec<BinnedRow> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let bins = MAX_BINS.min(values.len());
    let per_bin = values.len().div_ceil(bins);
    let mut out = Vec::new();
    for (bin, chunk) in order.chunks(per_bin).enumerate() {
        let n = chunk.len();
        let covariate_mean = chunk.iter().map(|&i| values[i]).sum::<f64>() / n as f64;
        let coord_mean = chunk.iter().map(|&i| coords[i]).sum::<f64>() / n as f64;
        out.push(BinnedRow {
            group: group.to_owned(),
            component,
            covariate,
            bin,
            covariate_mean,
            coord_mean,
            n,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::srp::SrpProfile;

    fn profile(values: [f64; 13]) -> SrpProfile {
        SrpProfile::from_parts(values, false)
    }

    fn push(m: &mut SrpMatrix, id: &str, label: Label, values: [f64; 13]) {
        m.push(id, label, &profile(values)).unwrap();
    }

    #[test]
    fn pearson_basics() {
        let x = [1.0, 2.0, 3.0];
        assert!((pearson(&x, &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&x, &[5.0, 5.0, 5.0]), None);
        assert_eq!(pearson(&[], &[]), None);
    }

    #[test]
    fn identical_profiles_correlate_perfectly() {
        let mut values = [0.0; 13];
        values[0] = 0.6;
        values[4] = -0.8;
        let mut m = SrpMatrix::new();
        for i in 0..4 {
            push(&mut m, &format!("a{i}"), Label::Controversial, values);
        }
        let summary = pairwise_pearson(&m, None).unwrap();
        assert!((summary.mean - 1.0).abs() < 1e-12);
        assert!(summary.sd < 1e-12);
        assert_eq!(summary.pairs, 6);
        assert_eq!(summary.excluded_zero_variance, 0);
    }

    #[test]
    fn negated_centered_profile_gives_minus_one() {
        let mut a = [0.0; 13];
        a[0] = 0.5;
        a[1] = -0.5;
        let mut b = [0.0; 13];
        b[0] = -0.5;
        b[1] = 0.5;
        let mut m = SrpMatrix::new();
        push(&mut m, "a", Label::Controversial, a);
        push(&mut m, "b", Label::Controversial, b);
        let summary = pairwise_pearson(&m, None).unwrap();
        assert!((summary.mean + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_profiles_are_excluded() {
        let flat = [0.27; 13];
        let mut varied = [0.0; 13];
        varied[2] = 1.0;
        let mut m = SrpMatrix::new();
        push(&mut m, "flat1", Label::Controversial, flat);
        push(&mut m, "flat2", Label::Controversial, flat);
        push(&mut m, "v1", Label::Controversial, varied);
        let err = pairwise_pearson(&m, None);
        // all three pairs involve a zero-variance profile
        assert!(err.is_err());

        let mut varied2 = [0.0; 13];
        varied2[3] = 1.0;
        push(&mut m, "v2", Label::Controversial, varied2);
        let summary = pairwise_pearson(&m, None).unwrap();
        assert_eq!(summary.pairs, 1);
        assert_eq!(summary.excluded_zero_variance, 5);
    }

    #[test]
    fn group_filter_restricts_rows() {
        let mut a = [0.0; 13];
        a[0] = 1.0;
        let mut b = [0.0; 13];
        b[1] = 1.0;
        let mut m = SrpMatrix::new();
        push(&mut m, "c1", Label::Controversial, a);
        push(&mut m, "n1", Label::NonControversial, b);
        assert!(pairwise_pearson(&m, Some(Label::Controversial)).is_err());
        assert!(pairwise_pearson(&m, None).is_ok());
    }

    #[test]
    fn unflatten_covers_all_pairs() {
        let n = 7;
        let mut seen = Vec::new();
        for flat in 0..(n * (n - 1) / 2) {
            seen.push(unflatten_pair(flat, n));
        }
        let mut expected = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                expected.push((i, j));
            }
        }
        assert_eq!(seen, expected);
    }

    #[test]
    fn correlates_flag_constant_covariate_and_missing_metadata() {
        let projections = vec![
            Projection {
                article_id: "a".into(),
                label: Label::Controversial,
                coords: vec![1.0, 0.0],
            },
            Projection {
                article_id: "b".into(),
                label: Label::Controversial,
                coords: vec![2.0, 0.5],
            },
            Projection {
                article_id: "ghost".into(),
                label: Label::NonControversial,
                coords: vec![0.0, 0.0],
            },
        ];
        let mut metadata = HashMap::new();
        for (id, rate) in [("a", 1.0), ("b", 2.0)] {
            metadata.insert(
                id.to_owned(),
                ArticleMetadata {
                    editor_count: 5,
                    age_days: 100.0,
                    edit_rate: rate,
                    age_zero: false,
                },
            );
        }
        let report = external_correlates(&projections, &metadata);
        assert_eq!(report.missing_metadata, vec!["ghost".to_owned()]);
        let const_row = report
            .rows
            .iter()
            .find(|r| {
                r.group == "controversial"
                    && r.component == 1
                    && r.covariate == Covariate::EditorCount
            })
            .unwrap();
        assert_eq!(const_row.r, None);
        assert!(const_row.note.as_deref().unwrap().contains("zero-variance"));
        let rate_row = report
            .rows
            .iter()
            .find(|r| {
                r.group == "controversial" && r.component == 1 && r.covariate == Covariate::EditRate
            })
            .unwrap();
        assert!((rate_row.r.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn planted_correlation_is_recovered() {
        // coords equal to the covariate: r must be exactly 1
        let mut projections = Vec::new();
        let mut metadata = HashMap::new();
        for i in 0..20 {
            let id = format!("a{i}");
            projections.push(Projection {
                article_id: id.clone(),
                label: Label::Controversial,
                coords: vec![i as f64],
            });
            metadata.insert(
                id,
                ArticleMetadata {
                    editor_count: i,
                    age_days: 10.0 * i as f64,
                    edit_rate: 0.5,
                    age_zero: false,
                },
            );
        }
        let report = external_correlates(&projections, &metadata);
        let row = report
            .rows
            .iter()
            .find(|r| r.group == "all" && r.component == 1 && r.covariate == Covariate::EditorCount)
            .unwrap();
        assert!((row.r.unwrap() - 1.0).abs() < 1e-12);
        // binned rows: 10 bins of 2, means ascending
        let bins: Vec<&BinnedRow> = report
            .binned
            .iter()
            .filter(|b| {
                b.group == "all" && b.component == 1 && b.covariate == Covariate::EditorCount
            })
            .collect();
        assert_eq!(bins.len(), 10);
        assert!(bins
            .windows(2)
            .all(|w| w[0].covariate_mean < w[1].covariate_mean));
    }
}
