//! Revision-network motif analytics.
//!
//! Turns article revision logs into directed editor networks, counts their
//! triad classes against seeded null-model ensembles, normalizes the result
//! into subgraph ratio profiles, and analyzes profile collections with PCA
//! and correlation statistics.
//!
//! The pieces compose in that order:
//!
//! - [`ingest`]: revision logs from the live wiki API or fixture files,
//!   labels, and per-article metadata
//! - [`graph`]: the simple directed revision network
//! - [`census`]: the 16-class directed triad census and its 13 connected
//!   classes
//! - [`nullmodel`]: seeded uniform G(n, m) digraph ensembles
//! - [`srp`]: epsilon-damped relative abundances, unit-normalized
//! - [`analysis`]: PCA, pairwise Pearson statistics, external correlates
//! - [`pipeline`]: the batch CLI pipeline with cached stages and manifests

#![forbid(unsafe_code)]

pub mod analysis;
pub mod census;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod nullmodel;
pub mod pipeline;
pub mod srp;

pub use error::{Error, ErrorKind, Result};
