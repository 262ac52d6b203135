//! Subgraph ratio profiles.
//!
//! For each connected triad class i, the relative abundance against the null
//! ensemble is
//!
//! ```text
//! delta_i = (real_i - mean_i) / (real_i + mean_i + epsilon)
//! ```
//!
//! where `real_i` is the observed count, `mean_i` the ensemble average, and
//! `epsilon` damps classes that rarely appear at all. The 13 deltas
//! normalized to unit length form the profile. A profile whose delta vector
//! is exactly zero (forced graphs, tiny n) is flagged degenerate and carried
//! as a zero vector rather than an error so batch runs can skip it.

use serde::{Deserialize, Serialize};

use crate::census::{triad_census, TriadClass};
use crate::error::{Error, Result};
use crate::graph::RevisionNetwork;
use crate::nullmodel::{ensemble_census, NullModelConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaVector {
    values: [f64; 13],
}

impl DeltaVector {
    pub fn values(&self) -> &[f64; 13] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrpProfile {
    values: [f64; 13],
    degenerate: bool,
}

impl SrpProfile {
    pub fn values(&self) -> &[f64; 13] {
        &self.values
    }

    pub fn get(&self, class: TriadClass) -> f64 {
        let i = TriadClass::CONNECTED
            .iter()
            .position(|&c| c == class)
            .expect("connected class");
        self.values[i]
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn from_parts(values: [f64; 13], degenerate: bool) -> Self {
        SrpProfile { values, degenerate }
    }
}

/// Componentwise delta of observed counts against the ensemble mean.
pub fn compute_delta(real: &[u64; 13], rand_mean: &[f64; 13], epsilon: f64) -> Result<DeltaVector> {
    if !(epsilon >= 0.0) {
        return Err(Error::Precondition(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    if rand_mean.iter().any(|&m| !(m >= 0.0)) {
        return Err(Error::Precondition(
            "ensemble means must be nonnegative".into(),
        ));
    }
    let mut values = [0.0f64; 13];
    for i in 0..13 {
        let real_i = real[i] as f64;
        let denom = real_i + rand_mean[i] + epsilon;
        if denom == 0.0 {
            return Err(Error::DivisionDegeneracy {
                class: TriadClass::CONNECTED[i].code(),
            });
        }
        values[i] = (real_i - rand_mean[i]) / denom;
    }
    Ok(DeltaVector { values })
}

/// Normalize a delta vector to unit length. An exactly-zero delta yields the
/// flagged zero profile.
pub fn normalize_srp(delta: &DeltaVector) -> SrpProfile {
    let norm = delta.values.iter().map(|d| d * d).sum::<f64>().sqrt();
    if norm == 0.0 {
        return SrpProfile {
            values: [0.0; 13],
            degenerate: true,
        };
    }
    let mut values = [0.0f64; 13];
    for i in 0..13 {
        values[i] = delta.values[i] / norm;
    }
    SrpProfile {
        values,
        degenerate: false,
    }
}

/// Full profile for one network: census, matched ensemble, delta, normalize.
pub fn article_srp(net: &RevisionNetwork, config: &NullModelConfig) -> Result<SrpProfile> {
    if net.node_count() < 3 {
        return Err(Error::InsufficientNodes {
            nodes: net.node_count(),
        });
    }
    let real = triad_census(net).connected_counts();
    let stats = ensemble_census(net.node_count(), net.edge_count(), config)?;
    let delta = compute_delta(&real, &stats.mean, config.epsilon)?;
    Ok(normalize_srp(&delta))
}

/// Summary statistics for one triad class across a set of profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStat {
    pub class: String,
    pub mean: f64,
    /// Population standard deviation.
    pub sd: f64,
    /// Articles whose individual score exceeds +cutoff.
    pub above_cutoff: usize,
    /// Articles whose individual score falls below -cutoff.
    pub below_cutoff: usize,
}

/// Motif significance report: per-class aggregate scores plus the classes
/// whose mean crosses the cutoff in either direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotifReport {
    pub cutoff: f64,
    pub profiles_used: usize,
    pub degenerate_skipped: usize,
    pub classes: Vec<ClassStat>,
    pub motifs: Vec<String>,
    pub anti_motifs: Vec<String>,
}

/// Per-class mean/SD over non-degenerate profiles, with classes whose mean
/// exceeds `+cutoff` labeled motifs and below `-cutoff` anti-motifs.
pub fn significant_motifs(profiles: &[SrpProfile], cutoff: f64) -> Result<MotifReport> {
    if !(cutoff > 0.0) {
        return Err(Error::Precondition(format!(
            "cutoff must be > 0, got {cutoff}"
        )));
    }
    let usable: Vec<&SrpProfile> = profiles.iter().filter(|p| !p.is_degenerate()).collect();
    if usable.is_empty() {
        return Err(Error::Precondition(
            "no non-degenerate profiles to analyze".into(),
        ));
    }
    let k = usable.len() as f64;
    let mut classes = Vec::with_capacity(13);
    let mut motifs = Vec::new();
    let mut anti_motifs = Vec::new();
    for (i, class) in TriadClass::CONNECTED.iter().enumerate() {
        let mut sum = 0.0;
        let mut above = 0usize;
        let mut below = 0usize;
        for p in &usable {
            let v = p.values()[i];
            sum += v;
            if v > cutoff {
                above += 1;
            } else if v < -cutoff {
                below += 1;
            }
        }
        let mean = sum / k;
        let var = usable
            .iter()
            .map(|p| {
                let d = p.values()[i] - mean;
                d * d
            })
            .sum::<f64>()
            / k;
        if mean > cutoff {
            motifs.push(class.code().to_owned());
        } else if mean < -cutoff {
            anti_motifs.push(class.code().to_owned());
        }
        classes.push(ClassStat {
            class: class.code().to_owned(),
            mean,
            sd: var.sqrt(),
            above_cutoff: above,
            below_cutoff: below,
        });
    }
    Ok(MotifReport {
        cutoff,
        profiles_used: usable.len(),
        degenerate_skipped: profiles.len() - usable.len(),
        classes,
        motifs,
        anti_motifs,
    })
}
