//! Principal component analysis over profile matrices.
//!
//! The covariance matrix is only 13x13, so the eigendecomposition uses
//! cyclic Jacobi rotations: unconditionally stable for symmetric input and
//! trivially fast at this size. The solver caps itself at 64 sweeps and
//! reports a numerical error if the off-diagonal mass has not collapsed by
//! then (typical inputs need fewer than 10). Components carry a
//! deterministic sign convention (largest-magnitude loading positive, ties
//! to the lowest class index) so repeated runs emit identical reports.

use serde::{Deserialize, Serialize};

use super::{SrpMatrix, SRP_DIM};
use crate::error::{Error, Result};
use crate::ingest::Label;

const JACOBI_MAX_SWEEPS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    /// Column means of the fitted matrix.
    pub mean: [f64; SRP_DIM],
    /// Orthonormal loadings, one per component, descending eigenvalue.
    pub components: Vec<[f64; SRP_DIM]>,
    /// Nonnegative, descending.
    pub eigenvalues: Vec<f64>,
    /// eigenvalue_i / sum(eigenvalues); sums to 1.
    pub explained_variance: Vec<f64>,
    /// True when columns were scaled to unit variance before fitting.
    pub standardized: bool,
    /// Column scale factors applied before fitting (all 1 when not standardized).
    pub scale: [f64; SRP_DIM],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub article_id: String,
    pub label: Label,
    pub coords: Vec<f64>,
}

/// Fit PCA on the sample covariance (divisor N-1) of the raw profile matrix.
pub fn pca_fit(matrix: &SrpMatrix) -> Result<PcaResult> {
    fit(matrix, false)
}

/// Fit PCA on the correlation matrix instead: columns are scaled to unit
/// variance before the eigendecomposition. Columns with zero variance are
/// left unscaled.
pub fn pca_fit_standardized(matrix: &SrpMatrix) -> Result<PcaResult> {
    fit(matrix, true)
}

fn fit(matrix: &SrpMatrix, standardized: bool) -> Result<PcaResult> {
    let rows = matrix.rows();
    let n = rows.len();
    if n < 2 {
        return Err(Error::Precondition(format!(
            "PCA needs at least 2 rows, got {n}"
        )));
    }

    let mut mean = [0.0f64; SRP_DIM];
    for row in rows {
        for (m, v) in mean.iter_mut().zip(row.values) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }

    let mut scale = [1.0f64; SRP_DIM];
    if standardized {
        for j in 0..SRP_DIM {
            let var = rows
                .iter()
                .map(|r| {
                    let d = r.values[j] - mean[j];
                    d * d
                })
                .sum::<f64>()
                / (n as f64 - 1.0);
            if var > 0.0 {
                scale[j] = 1.0 / var.sqrt();
            }
        }
    }

    // sample covariance of the centered (and possibly scaled) columns
    let mut cov = [[0.0f64; SRP_DIM]; SRP_DIM];
    for row in rows {
        let mut centered = [0.0f64; SRP_DIM];
        for j in 0..SRP_DIM {
            centered[j] = (row.values[j] - mean[j]) * scale[j];
        }
        for i in 0..SRP_DIM {
            for j in i..SRP_DIM {
                cov[i][j] += centered[i] * centered[j];
            }
        }
    }
    for i in 0..SRP_DIM {
        for j in i..SRP_DIM {
            cov[i][j] /= n as f64 - 1.0;
            cov[j][i] = cov[i][j];
        }
    }

    let (mut eigenvalues, mut components) = jacobi_eigh(&cov)?;

    // descending eigenvalues; clamp the tiny negatives rounding can produce
    let mut order: Vec<usize> = (0..SRP_DIM).collect();
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));
    eigenvalues = order.iter().map(|&i| eigenvalues[i].max(0.0)).collect();
    components = order.iter().map(|&i| components[i]).collect();

    for component in &mut components {
        orient(component);
    }

    let total: f64 = eigenvalues.iter().sum();
    if total <= 0.0 {
        return Err(Error::Numerical(
            "zero total variance: all profiles identical".into(),
        ));
    }
    let explained_variance = eigenvalues.iter().map(|&l| l / total).collect();

    Ok(PcaResult {
        mean,
        components,
        eigenvalues,
        explained_variance,
        standardized,
        scale,
    })
}

/// Largest-magnitude entry positive; among equal magnitudes the lowest class
/// index decides.
fn orient(component: &mut [f64; SRP_DIM]) {
    let mut best = 0usize;
    for i in 1..SRP_DIM {
        if component[i].abs() > component[best].abs() {
            best = i;
        }
    }
    if component[best] < 0.0 {
        for v in component.iter_mut() {
            *v = -*v;
        }
    }
}

/// Project rows onto the first `k` components.
pub fn pca_project(result: &PcaResult, matrix: &SrpMatrix, k: usize) -> Result<Vec<Projection>> {
    if k == 0 || k > result.components.len() {
        return Err(Error::Precondition(format!(
            "k must be in 1..={}, got {k}",
            result.components.len()
        )));
    }
    Ok(matrix
        .rows()
        .iter()
        .map(|row| {
            let mut centered = [0.0f64; SRP_DIM];
            for j in 0..SRP_DIM {
                centered[j] = (row.values[j] - result.mean[j]) * result.scale[j];
            }
            let coords = result.components[..k]
                .iter()
                .map(|c| c.iter().zip(centered).map(|(a, b)| a * b).sum())
                .collect();
            Projection {
                article_id: row.article_id.clone(),
                label: row.label,
                coords,
            }
        })
        .collect())
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.
/// Returns (eigenvalues, eigenvectors-as-rows), unsorted.
fn jacobi_eigh(matrix: &[[f64; SRP_DIM]; SRP_DIM]) -> Result<(Vec<f64>, Vec<[f64; SRP_DIM]>)> {
    let mut a = *matrix;
    // v[c] accumulates the c-th eigenvector (column c of the rotation product)
    let mut v = [[0.0f64; SRP_DIM]; SRP_DIM];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let scale: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..SRP_DIM)
            .flat_map(|p| ((p + 1)..SRP_DIM).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q].abs())
            .sum();
        // rounding leaves ~n^2 * eps * scale in the off-diagonal sum, so the
        // stopping threshold must sit above that floor
        if off <= 1e-12 * scale {
            let eigenvalues = (0..SRP_DIM).map(|i| a[i][i]).collect();
            let mut vectors = Vec::with_capacity(SRP_DIM);
            for c in 0..SRP_DIM {
                let mut col = [0.0f64; SRP_DIM];
                for r in 0..SRP_DIM {
                    col[r] = v[r][c];
                }
                vectors.push(col);
            }
            return Ok((eigenvalues, vectors));
        }

        for p in 0..SRP_DIM - 1 {
            for q in (p + 1)..SRP_DIM {
                if a[p][q].abs() <= f64::MIN_POSITIVE {
                    continue;
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
                for i in 0..SRP_DIM {
                    if i != p && i != q {
                        let aip = a[i][p];
                        let aiq = a[i][q];
                        a[i][p] = c * aip - s * aiq;
                        a[p][i] = a[i][p];
                        a[i][q] = s * aip + c * aiq;
                        a[q][i] = a[i][q];
                    }
                }
                for row in &mut v {
                    let vip = row[p];
                    let viq = row[q];
                    row[p] = c * vip - s * viq;
                    row[q] = s * vip + c * viq;
                }
            }
        }
    }
    Err(Error::Numerical(format!(
        "Jacobi eigensolver did not converge within {JACOBI_MAX_SWEEPS} sweeps"
    )))
}
