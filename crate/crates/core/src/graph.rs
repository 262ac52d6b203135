//! Directed revision networks.
//!
//! Nodes are unique editors. A directed edge `(p, q)` means "editor p revised
//! the article immediately after editor q". The graph is simple: no self-loops
//! and no multi-edges. Nodes are re-indexed to dense integers internally;
//! original editor identifiers are kept for reporting and export.

use std::collections::{HashMap, HashSet};
use std::io::Write;

use crate::error::{Error, Result};
use crate::ingest::RevisionLog;

#[derive(Debug, Clone)]
pub struct RevisionNetwork {
    names: Vec<String>,
    index: HashMap<String, u32>,
    out: Vec<HashSet<u32>>,
    inc: Vec<HashSet<u32>>,
    /// Undirected neighbor lists, sorted and deduplicated.
    und: Vec<Vec<u32>>,
    edge_count: usize,
}

impl RevisionNetwork {
    /// Build from explicit node names and directed name pairs. Endpoints not
    /// listed in `nodes` are added; extra entries in `nodes` become isolated
    /// nodes. Self-loops are rejected.
    pub fn from_edge_list<'a, N, E>(nodes: N, edges: E) -> Result<Self>
    where
        N: IntoIterator<Item = &'a str>,
        E: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut builder = Builder::new();
        for name in nodes {
            builder.intern(name);
        }
        for (src, dst) in edges {
            if src == dst {
                return Err(Error::Precondition(format!(
                    "self-loop on {src:?} not allowed"
                )));
            }
            let s = builder.intern(src);
            let d = builder.intern(dst);
            builder.edge(s, d);
        }
        Ok(builder.finish())
    }

    /// Build from dense indices, e.g. for generated graphs. Node names are the
    /// stringified indices. Panics (debug) on self-loops; duplicates collapse.
    pub fn from_index_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut builder = Builder::with_capacity(n);
        for i in 0..n {
            builder.push_unnamed(i);
        }
        for &(s, d) in edges {
            debug_assert_ne!(s, d, "self-loop in index edge list");
            builder.edge(s, d);
        }
        builder.finish()
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// m / (n * (n - 1)), defined as 0 when n < 2.
    pub fn density(&self) -> f64 {
        let n = self.node_count();
        if n < 2 {
            0.0
        } else {
            self.edge_count as f64 / (n as f64 * (n as f64 - 1.0))
        }
    }

    pub fn node_name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).map(|&i| i as usize)
    }

    pub fn has_arc(&self, src: usize, dst: usize) -> bool {
        self.out[src].contains(&(dst as u32))
    }

    pub fn has_edge_named(&self, src: &str, dst: &str) -> bool {
        match (self.node_index(src), self.node_index(dst)) {
            (Some(s), Some(d)) => self.has_arc(s, d),
            _ => false,
        }
    }

    /// True when at least one arc exists between `a` and `b` in either direction.
    pub fn linked(&self, a: usize, b: usize) -> bool {
        self.has_arc(a, b) || self.has_arc(b, a)
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.out[i].len()
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.inc[i].len()
    }

    pub(crate) fn und_neighbors(&self, i: usize) -> &[u32] {
        &self.und[i]
    }

    /// All arcs as dense index pairs, sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (src, dsts) in self.out.iter().enumerate() {
            for &dst in dsts {
                out.push((src as u32, dst));
            }
        }
        out.sort_unstable();
        out
    }

    /// All arcs as original editor names, in sorted index order.
    pub fn named_edges(&self) -> Vec<(&str, &str)> {
        self.edges()
            .into_iter()
            .map(|(s, d)| (self.node_name(s as usize), self.node_name(d as usize)))
            .collect()
    }

    /// Edge-list export: one `src<TAB>dst` pair per line, original names.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (src, dst) in self.named_edges() {
            writeln!(w, "{src}\t{dst}")?;
        }
        Ok(())
    }
}

struct Builder {
    names: Vec<String>,
    index: HashMap<String, u32>,
    edges: Vec<(u32, u32)>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            names: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
        }
    }

    fn with_capacity(n: usize) -> Self {
        Builder {
            names: Vec::with_capacity(n),
            index: HashMap::with_capacity(n),
            edges: Vec::new(),
        }
    }

    fn intern(&mut self, name: &str) -> u32 {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len() as u32;
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), i);
        i
    }

    fn push_unnamed(&mut self, i: usize) {
        let name = i.to_string();
        self.index.insert(name.clone(), i as u32);
        self.names.push(name);
    }

    fn edge(&mut self, src: u32, dst: u32) {
        self.edges.push((src, dst));
    }

    fn finish(self) -> RevisionNetwork {
        let n = self.names.len();
        let mut out = vec![HashSet::new(); n];
        let mut inc = vec![HashSet::new(); n];
        let mut und = vec![Vec::new(); n];
        let mut edge_count = 0usize;
        for (src, dst) in self.edges {
            if out[src as usize].insert(dst) {
                inc[dst as usize].insert(src);
                und[src as usize].push(dst);
                und[dst as usize].push(src);
                edge_count += 1;
            }
        }
        for list in &mut und {
            list.sort_unstable();
            list.dedup();
        }
        RevisionNetwork {
            names: self.names,
            index: self.index,
            out,
            inc,
            und,
            edge_count,
        }
    }
}

/// Build the revision network from a chronological revision log.
///
/// For each consecutive pair of events, an arc is added from the later
/// editor to the earlier one; consecutive events by the same editor add
/// nothing, and repeated pairs collapse. The node set covers every distinct
/// editor in the log, so a single-editor log yields one isolated node.
pub fn build_revision_network(log: &RevisionLog) -> Result<RevisionNetwork> {
    if log.events.is_empty() {
        return Err(Error::InsufficientData(format!(
            "article {:?} has no revision events",
            log.article_id
        )));
    }
    let mut builder = Builder::new();
    let mut prev: Option<u32> = None;
    for event in &log.events {
        let cur = builder.intern(&event.editor);
        if let Some(earlier) = prev {
            if earlier != cur {
                builder.edge(cur, earlier);
            }
        }
        prev = Some(cur);
    }
    Ok(builder.finish())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub density: f64,
}

pub fn graph_stats(net: &RevisionNetwork) -> GraphStats {
    GraphStats {
        nodes: net.node_count(),
        edges: net.edge_count(),
        density: net.density(),
    }
}
