//! gSpan frequent-subgraph mining and per-graph component vectors.
//!
//! Support is counted per graph (transaction setting): a pattern's support
//! is the fraction of dataset graphs that contain it at least once. Patterns
//! grow one edge at a time along the rightmost path of their DFS code;
//! branches whose support falls below the threshold, or whose code is not
//! the minimum code of its pattern, are cut.

mod code;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphDataset};
use crate::incidence::Incidence;

pub use code::{code_order, is_minimal, DfsCode, DfsEdge};
use code::{extensions, seed_edges, Embedding};

#[derive(Debug, Error, PartialEq)]
pub enum MinerError {
    #[error("invalid miner config: {0}")]
    Config(String),
    #[error("pattern search exceeded the budget of {budget} search nodes at min support {theta}")]
    ResourceLimit { theta: f64, budget: usize },
    #[error("malformed DFS code: {0}")]
    MalformedCode(String),
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinerConfig {
    /// Minimum support threshold, in `(0, 1]`.
    pub min_support: f64,
    /// Largest pattern size, in edges.
    pub max_edges: usize,
    /// Upper bound on search-tree nodes visited before giving up.
    pub node_budget: usize,
}

impl MinerConfig {
    pub fn new(min_support: f64, max_edges: usize) -> Self {
        MinerConfig { min_support, max_edges, node_budget: 2_000_000 }
    }

    pub fn validate(&self) -> Result<(), MinerError> {
        if !(self.min_support > 0.0 && self.min_support <= 1.0) {
            return Err(MinerError::Config(format!(
                "min support must be in (0, 1], got {}",
                self.min_support
            )));
        }
        if self.max_edges < 1 {
            return Err(MinerError::Config("max_edges must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig::new(0.15, 5)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrequentSubgraph {
    pub code: DfsCode,
    pub support: f64,
    /// Ascending graph ids.
    pub supporting_graphs: Vec<usize>,
}

/// Frequent patterns in ascending code order plus per-graph presence rows.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentTable {
    pub vocabulary: Vec<FrequentSubgraph>,
    pub incidence: Incidence,
}

impl ComponentTable {
    fn build(vocabulary: Vec<FrequentSubgraph>, graph_count: usize) -> Self {
        let mut rows = vec![Vec::new(); graph_count];
        for (t, p) in vocabulary.iter().enumerate() {
            for &g in &p.supporting_graphs {
                rows[g].push(t);
            }
        }
        ComponentTable { incidence: Incidence::from_rows(vocabulary.len(), rows), vocabulary }
    }

    /// A table with no patterns, for skeleton-only runs.
    pub fn empty(graph_count: usize) -> Self {
        ComponentTable { vocabulary: Vec::new(), incidence: Incidence::empty(graph_count) }
    }

    pub fn len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabulary.is_empty()
    }

    /// One pattern per line: `<code>  support=<float>`.
    pub fn patterns_text(&self) -> String {
        let mut out = String::new();
        for p in &self.vocabulary {
            let _ = writeln!(out, "{}  support={}", p.code, p.support);
        }
        out
    }

    pub fn from_text(patterns: &str, incidence: &str) -> Result<Self, MinerError> {
        let mut codes = Vec::new();
        for line in patterns.lines().filter(|l| !l.trim().is_empty()) {
            let (code, support) = line
                .split_once("support=")
                .ok_or_else(|| MinerError::Parse(format!("missing support in {line:?}")))?;
            let support: f64 = support
                .trim()
                .parse()
                .map_err(|_| MinerError::Parse(format!("bad support in {line:?}")))?;
            codes.push((code.parse::<DfsCode>()?, support));
        }
        let incidence = Incidence::parse(incidence, codes.len())
            .map_err(|e| MinerError::Parse(e.to_string()))?;
        let n = incidence.row_count();
        let mut graphs = vec![Vec::new(); codes.len()];
        for (i, row) in incidence.rows().iter().enumerate() {
            for &t in row {
                graphs[t].push(i);
            }
        }
        let vocabulary = codes
            .into_iter()
            .zip(graphs)
            .map(|((code, support), supporting_graphs)| {
                let expected = supporting_graphs.len() as f64 / n as f64;
                if support != expected {
                    return Err(MinerError::Parse(format!(
                        "support {support} of {code} disagrees with incidence ({expected})"
                    )));
                }
                Ok(FrequentSubgraph { code, support, supporting_graphs })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ComponentTable { vocabulary, incidence })
    }
}

pub fn is_frequent(count: usize, graph_count: usize, min_support: f64) -> bool {
    count as f64 / graph_count as f64 >= min_support - 1e-12
}

fn support_set(embeddings: &[Embedding]) -> Vec<usize> {
    embeddings.iter().map(|e| e.graph).collect::<BTreeSet<_>>().into_iter().collect()
}

struct Miner<'a> {
    graphs: &'a [Graph],
    cfg: &'a MinerConfig,
    visited: &'a AtomicUsize,
}

impl Miner<'_> {
    fn grow(
        &self,
        code: DfsCode,
        embeddings: Vec<Embedding>,
        supporting: Vec<usize>,
        out: &mut Vec<FrequentSubgraph>,
    ) -> Result<(), MinerError> {
        if self.visited.fetch_add(1, Ordering::Relaxed) >= self.cfg.node_budget {
            return Err(MinerError::ResourceLimit {
                theta: self.cfg.min_support,
                budget: self.cfg.node_budget,
            });
        }
        let support = supporting.len() as f64 / self.graphs.len() as f64;
        let done = code.len() >= self.cfg.max_edges;
        out.push(FrequentSubgraph { code: code.clone(), support, supporting_graphs: supporting });
        if done {
            return Ok(());
        }
        let path = code.rightmost_path();
        let mut children: BTreeMap<DfsEdge, Vec<Embedding>> = BTreeMap::new();
        for emb in &embeddings {
            for (edge, grown) in extensions(&self.graphs[emb.graph], emb, &path) {
                children.entry(edge).or_default().push(grown);
            }
        }
        drop(embeddings);
        for (edge, embs) in children {
            let supporting = support_set(&embs);
            if !is_frequent(supporting.len(), self.graphs.len(), self.cfg.min_support) {
                continue;
            }
            let child = code.extended(edge);
            if is_minimal(&child)? {
                self.grow(child, embs, supporting, out)?;
            }
        }
        Ok(())
    }
}

/// Mines every connected pattern with `1..=max_edges` edges whose support is
/// at least `min_support`, each reported once under its minimum DFS code.
///
/// First-level branches run in parallel; the result is sorted by code, so
/// it does not depend on the thread count.
pub fn mine_frequent(ds: &GraphDataset, cfg: &MinerConfig) -> Result<ComponentTable, MinerError> {
    cfg.validate()?;
    let graphs = ds.graphs();
    let mut roots: BTreeMap<DfsEdge, Vec<Embedding>> = BTreeMap::new();
    for g in graphs {
        for (edge, emb) in seed_edges(g) {
            roots.entry(edge).or_default().push(emb);
        }
    }
    let roots: Vec<(DfsEdge, Vec<Embedding>, Vec<usize>)> = roots
        .into_iter()
        .filter_map(|(edge, embs)| {
            let supporting = support_set(&embs);
            is_frequent(supporting.len(), graphs.len(), cfg.min_support)
                .then_some((edge, embs, supporting))
        })
        .collect();

    let visited = AtomicUsize::new(0);
    let miner = Miner { graphs, cfg, visited: &visited };
    let branches = roots
        .into_par_iter()
        .map(|(edge, embs, supporting)| {
            let mut out = Vec::new();
            miner.grow(DfsCode(vec![edge]), embs, supporting, &mut out)?;
            Ok(out)
        })
        .collect::<Result<Vec<_>, MinerError>>()?;
    let mut vocabulary: Vec<FrequentSubgraph> = branches.into_iter().flatten().collect();
    vocabulary.sort_by(|a, b| a.code.cmp(&b.code));
    log::debug!("mined {} patterns, {} search nodes", vocabulary.len(), visited.into_inner());
    Ok(ComponentTable::build(vocabulary, graphs.len()))
}

/// The pattern graph of a code; nodes are numbered in DFS discovery order.
pub fn pattern_to_graph(code: &DfsCode) -> Result<Graph, MinerError> {
    code.to_graph()
}
