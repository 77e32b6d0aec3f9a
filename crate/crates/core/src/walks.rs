//! Random walks, anonymization and per-graph skeleton vectors.
//!
//! A walk `(v0, .., vl)` is anonymized by replacing every node with the rank
//! of its first appearance among the distinct nodes seen so far, so
//! `(A, A, B, C)` becomes `(1, 1, 2, 3)`. The set of anonymous walks observed
//! on a graph is its skeleton.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphDataset};
use crate::incidence::Incidence;
use crate::seeding;

#[derive(Debug, Error, PartialEq)]
pub enum WalkError {
    #[error("node {node} of graph {graph} has no neighbors; a walk cannot start or continue there")]
    DeadEnd { graph: usize, node: usize },
    #[error("graph {0} has no node with a neighbor")]
    NoStartableNode(usize),
    #[error("start node {node} does not exist in graph {graph}")]
    NoSuchNode { graph: usize, node: usize },
    #[error("sample bound domain error: {0}")]
    Domain(String),
    #[error("invalid walk config: {0}")]
    Config(String),
    #[error("cannot parse anonymous walk {0:?}")]
    Parse(String),
}

/// Restricted-growth integer sequence produced by [`anonymize`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AnonymousWalk(Vec<u32>);

impl AnonymousWalk {
    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// First element 1, each element at most one above the running maximum.
    pub fn is_restricted_growth(seq: &[u32]) -> bool {
        let mut max = 0;
        for &x in seq {
            if x == 0 || x > max + 1 {
                return false;
            }
            max = max.max(x);
        }
        true
    }
}

impl TryFrom<Vec<u32>> for AnonymousWalk {
    type Error = WalkError;

    fn try_from(seq: Vec<u32>) -> Result<Self, WalkError> {
        if seq.is_empty() || !Self::is_restricted_growth(&seq) {
            return Err(WalkError::Parse(format!("{seq:?}")));
        }
        Ok(AnonymousWalk(seq))
    }
}

impl fmt::Display for AnonymousWalk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

impl FromStr for AnonymousWalk {
    type Err = WalkError;

    fn from_str(s: &str) -> Result<Self, WalkError> {
        let seq = s
            .trim()
            .split('-')
            .map(|x| x.parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| WalkError::Parse(s.to_string()))?;
        AnonymousWalk::try_from(seq)
    }
}

/// Replaces every element by the 1-based rank of its first occurrence.
pub fn anonymize<T: PartialEq>(walk: &[T]) -> AnonymousWalk {
    let mut distinct: Vec<&T> = Vec::with_capacity(walk.len());
    let seq = walk
        .iter()
        .map(|x| match distinct.iter().position(|&d| d == x) {
            Some(i) => i as u32 + 1,
            None => {
                distinct.push(x);
                distinct.len() as u32
            }
        })
        .collect();
    AnonymousWalk(seq)
}

/// Uniform random walk of `length` steps (so `length + 1` nodes) from `start`.
pub fn random_walk<R: Rng + ?Sized>(
    g: &Graph,
    start: usize,
    length: usize,
    rng: &mut R,
) -> Result<Vec<usize>, WalkError> {
    if start >= g.node_count() {
        return Err(WalkError::NoSuchNode { graph: g.id(), node: start });
    }
    let mut walk = Vec::with_capacity(length + 1);
    walk.push(start);
    let mut current = start;
    for _ in 0..length {
        let &(next, _) = g
            .adjacency(current)
            .choose(rng)
            .ok_or(WalkError::DeadEnd { graph: g.id(), node: current })?;
        walk.push(next);
        current = next;
    }
    Ok(walk)
}

/// Number of walks needed so the empirical anonymous-walk distribution over
/// `lambda` distinct walks is within `epsilon` (L1) of the true one with
/// probability at least `1 - delta`:
/// `ceil(2/eps^2 * (ln(2^lambda - 2) - ln(delta)))`.
pub fn sample_bound(lambda: u32, epsilon: f64, delta: f64) -> Result<u64, WalkError> {
    if lambda < 2 {
        return Err(WalkError::Domain(format!("lambda must be >= 2, got {lambda}")));
    }
    if !(epsilon > 0.0) {
        return Err(WalkError::Domain(format!("epsilon must be > 0, got {epsilon}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(WalkError::Domain(format!("delta must be in (0, 1], got {delta}")));
    }
    // past 2^52 the "- 2" is below f64 resolution
    let log_count = if lambda <= 52 {
        (((1u64 << lambda) - 2) as f64).ln()
    } else {
        f64::from(lambda) * std::f64::consts::LN_2
    };
    let zeta = 2.0 / (epsilon * epsilon) * (log_count - delta.ln());
    Ok(zeta.ceil().max(1.0) as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetMode {
    /// `walks_per_node` walks from every node that has a neighbor.
    PerNode,
    /// A pilot `PerNode` pass estimates the number of distinct anonymous walks
    /// `lambda`; each graph then gets `sample_bound(lambda, eps, delta)` walks
    /// from uniformly random start nodes.
    GlobalBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkConfig {
    pub length: usize,
    pub walks_per_node: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub budget_mode: BudgetMode,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            length: 10,
            walks_per_node: 50,
            epsilon: 1.0,
            delta: 0.05,
            seed: 0,
            budget_mode: BudgetMode::PerNode,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<(), WalkError> {
        if self.length < 1 {
            return Err(WalkError::Config("walk length must be >= 1".into()));
        }
        if self.walks_per_node < 1 {
            return Err(WalkError::Config("walks per node must be >= 1".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(WalkError::Config("epsilon must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(WalkError::Config("delta must be in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Anonymous-walk vocabulary plus the per-graph presence rows.
#[derive(Clone, Debug, PartialEq)]
pub struct SkeletonTable {
    pub vocabulary: Vec<AnonymousWalk>,
    pub incidence: Incidence,
}

impl SkeletonTable {
    pub fn len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabulary.is_empty()
    }

    /// Vocabulary file: one walk per line, dash separated.
    pub fn vocabulary_text(&self) -> String {
        self.vocabulary.iter().map(|w| format!("{w}\n")).collect()
    }

    pub fn from_text(vocabulary: &str, incidence: &str) -> Result<Self, WalkError> {
        let vocabulary = vocabulary
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<AnonymousWalk>, _>>()?;
        let incidence = Incidence::parse(incidence, vocabulary.len())
            .map_err(|e| WalkError::Parse(e.to_string()))?;
        Ok(SkeletonTable { vocabulary, incidence })
    }

    fn from_sets(sets: Vec<BTreeSet<AnonymousWalk>>) -> Self {
        let vocabulary: Vec<AnonymousWalk> =
            sets.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let rows = sets
            .iter()
            .map(|set| {
                // both sides sorted: merge
                let mut row = Vec::with_capacity(set.len());
                let mut col = 0;
                for walk in set {
                    while vocabulary[col] < *walk {
                        col += 1;
                    }
                    row.push(col);
                }
                row
            })
            .collect();
        SkeletonTable { incidence: Incidence::from_rows(vocabulary.len(), rows), vocabulary }
    }
}

fn startable(g: &Graph) -> Result<Vec<usize>, WalkError> {
    let nodes: Vec<usize> = (0..g.node_count()).filter(|&v| g.degree(v) > 0).collect();
    if nodes.is_empty() {
        return Err(WalkError::NoStartableNode(g.id()));
    }
    Ok(nodes)
}

fn per_node_walks(g: &Graph, cfg: &WalkConfig, stream: &str) -> Result<BTreeSet<AnonymousWalk>, WalkError> {
    let mut rng = seeding::stream(cfg.seed, stream, g.id() as u64);
    let mut seen = BTreeSet::new();
    for start in startable(g)? {
        for _ in 0..cfg.walks_per_node {
            seen.insert(anonymize(&random_walk(g, start, cfg.length, &mut rng)?));
        }
    }
    Ok(seen)
}

fn bounded_walks(g: &Graph, cfg: &WalkConfig, count: u64) -> Result<BTreeSet<AnonymousWalk>, WalkError> {
    let mut rng = seeding::stream(cfg.seed, seeding::WALKS, g.id() as u64);
    let starts = startable(g)?;
    let mut seen = BTreeSet::new();
    for _ in 0..count {
        let start = *starts.choose(&mut rng).unwrap();
        seen.insert(anonymize(&random_walk(g, start, cfg.length, &mut rng)?));
    }
    Ok(seen)
}

/// Samples walks on every graph and builds the skeleton table.
///
/// Graphs are sampled in parallel; each owns a random stream keyed by
/// `(seed, graph id)` so the result does not depend on the thread count.
/// Isolated nodes are skipped as start nodes.
pub fn build_skeletons(ds: &GraphDataset, cfg: &WalkConfig) -> Result<SkeletonTable, WalkError> {
    cfg.validate()?;
    let sets = match cfg.budget_mode {
        BudgetMode::PerNode => ds
            .graphs()
            .par_iter()
            .map(|g| per_node_walks(g, cfg, seeding::WALKS))
            .collect::<Result<Vec<_>, _>>()?,
        BudgetMode::GlobalBound => {
            let pilot = ds
                .graphs()
                .par_iter()
                .map(|g| per_node_walks(g, cfg, "walks-pilot"))
                .collect::<Result<Vec<_>, _>>()?;
            let lambda = pilot.iter().flatten().collect::<BTreeSet<_>>().len().max(2);
            let delta = if cfg.delta > 0.0 { cfg.delta } else { f64::MIN_POSITIVE };
            let count = sample_bound(lambda as u32, cfg.epsilon, delta)?;
            log::info!("global walk budget: lambda={lambda}, {count} walks per graph");
            ds.graphs()
                .par_iter()
                .map(|g| bounded_walks(g, cfg, count))
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    Ok(SkeletonTable::from_sets(sets))
}
