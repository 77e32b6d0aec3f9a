//! Exact (exponential) subgraph matching and connected-subgraph enumeration.
//!
//! These are reference oracles for small inputs; the miner never calls them.

use std::collections::{HashMap, HashSet, VecDeque};

use super::{Edge, Graph, GraphError, Label};

pub const ORACLE_MAX_NODES: usize = 10;
pub const ORACLE_MAX_EDGES: usize = 8;

/// Is there an injective, label-preserving map of `pattern` into `host` that
/// carries every pattern edge onto a host edge with the same label?
///
/// Non-induced (edge-subset) semantics. `pattern` must be connected.
pub fn subgraph_isomorphic(pattern: &Graph, host: &Graph) -> Result<bool, GraphError> {
    if !pattern.is_connected() {
        return Err(GraphError::InvalidPattern("pattern is not connected".into()));
    }
    if pattern.node_count() > host.node_count() || pattern.edge_count() > host.edge_count() {
        return Ok(false);
    }
    let order = match_order(pattern);
    let mut search = Search {
        pattern,
        host,
        order: &order,
        map: vec![usize::MAX; pattern.node_count()],
        used: vec![false; host.node_count()],
    };
    Ok(search.extend(0))
}

/// Isomorphism test for a connected `a` against any `b`.
pub fn are_isomorphic(a: &Graph, b: &Graph) -> Result<bool, GraphError> {
    if a.node_count() != b.node_count() || a.edge_count() != b.edge_count() {
        return Ok(false);
    }
    // equal counts turn an injective edge-preserving map into a bijection
    subgraph_isomorphic(a, b)
}

// Matching order: BFS from the highest-degree node; every later node has an
// earlier neighbor (`anchor`) whose image restricts its candidates.
struct Step {
    node: usize,
    anchor: Option<(usize, Label)>,
}

fn match_order(pattern: &Graph) -> Vec<Step> {
    let n = pattern.node_count();
    let root = (0..n).max_by_key(|&v| (pattern.degree(v), std::cmp::Reverse(v))).unwrap_or(0);
    let mut placed = vec![false; n];
    let mut order = vec![Step { node: root, anchor: None }];
    placed[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &(w, e) in pattern.adjacency(v) {
            if !placed[w] {
                placed[w] = true;
                order.push(Step { node: w, anchor: Some((v, pattern.edge(e).label)) });
                queue.push_back(w);
            }
        }
    }
    order
}

struct Search<'a> {
    pattern: &'a Graph,
    host: &'a Graph,
    order: &'a [Step],
    map: Vec<usize>,
    used: Vec<bool>,
}

impl Search<'_> {
    fn extend(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let step = &self.order[depth];
        let candidates: Vec<usize> = match step.anchor {
            None => (0..self.host.node_count()).collect(),
            Some((anchor, label)) => self
                .host
                .adjacency(self.map[anchor])
                .iter()
                .filter(|&&(_, e)| self.host.edge(e).label == label)
                .map(|&(w, _)| w)
                .collect(),
        };
        let v = step.node;
        for h in candidates {
            if self.used[h] || !self.compatible(v, h) {
                continue;
            }
            self.map[v] = h;
            self.used[h] = true;
            if self.extend(depth + 1) {
                return true;
            }
            self.used[h] = false;
            self.map[v] = usize::MAX;
        }
        false
    }

    fn compatible(&self, v: usize, h: usize) -> bool {
        if self.pattern.node_label(v) != self.host.node_label(h)
            || self.pattern.degree(v) > self.host.degree(h)
        {
            return false;
        }
        self.pattern.adjacency(v).iter().all(|&(w, e)| {
            let image = if w == v { h } else { self.map[w] };
            if image == usize::MAX {
                return true;
            }
            match self.host.find_edge(h, image) {
                Some(he) => self.host.edge(he).label == self.pattern.edge(e).label,
                None => false,
            }
        })
    }
}

/// One representative per isomorphism class of connected edge-induced
/// subgraphs of `g` with `1..=max_edges` edges.
///
/// Brute force; limited to graphs with at most [`ORACLE_MAX_NODES`] nodes and
/// `max_edges <= ORACLE_MAX_EDGES`. Output is ordered by edge count, then by
/// discovery order.
pub fn enumerate_connected_subgraphs(g: &Graph, max_edges: usize) -> Result<Vec<Graph>, GraphError> {
    if g.node_count() > ORACLE_MAX_NODES || max_edges > ORACLE_MAX_EDGES {
        return Err(GraphError::OracleScale(format!(
            "{} nodes / max_edges {max_edges} exceeds {ORACLE_MAX_NODES} / {ORACLE_MAX_EDGES}",
            g.node_count()
        )));
    }
    let m = g.edge_count();
    debug_assert!(m <= 64);
    // edge-adjacency masks
    let touching: Vec<u64> = g
        .edges()
        .iter()
        .map(|e| {
            g.adjacency(e.u)
                .iter()
                .chain(g.adjacency(e.v))
                .fold(0u64, |mask, &(_, f)| mask | (1 << f))
        })
        .collect();

    let mut layers: Vec<Vec<u64>> = vec![(0..m).map(|e| 1u64 << e).collect()];
    while layers.len() < max_edges {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for &set in layers.last().unwrap() {
            let frontier = bits(set).fold(0u64, |acc, e| acc | touching[e]) & !set;
            for e in bits(frontier) {
                let grown = set | (1 << e);
                if seen.insert(grown) {
                    next.push(grown);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        layers.push(next);
    }

    let mut classes: Vec<Graph> = Vec::new();
    let mut buckets: HashMap<Invariant, Vec<usize>> = HashMap::new();
    for set in layers.into_iter().flatten() {
        let sub = edge_subgraph(g, set);
        let bucket = buckets.entry(invariant(&sub)).or_default();
        let mut duplicate = false;
        for &idx in bucket.iter() {
            if are_isomorphic(&sub, &classes[idx])? {
                duplicate = true;
                break;
            }
        }
        if !duplicate {
            bucket.push(classes.len());
            classes.push(sub);
        }
    }
    Ok(classes)
}

fn bits(mut set: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if set == 0 {
            return None;
        }
        let b = set.trailing_zeros() as usize;
        set &= set - 1;
        Some(b)
    })
}

fn edge_subgraph(g: &Graph, set: u64) -> Graph {
    let mut local = vec![usize::MAX; g.node_count()];
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    for e in bits(set) {
        let edge = g.edge(e);
        for x in [edge.u, edge.v] {
            if local[x] == usize::MAX {
                local[x] = labels.len();
                labels.push(g.node_label(x));
            }
        }
        edges.push(Edge { u: local[edge.u], v: local[edge.v], ..edge.clone() });
    }
    Graph::build(g.id(), labels, edges, g.class_label(), true)
        .expect("edge subset of a valid graph is valid")
}

type Invariant = (usize, usize, Vec<Label>, Vec<Label>, Vec<usize>);

fn invariant(g: &Graph) -> Invariant {
    let mut nl = g.node_labels().to_vec();
    nl.sort_unstable();
    let mut el: Vec<Label> = g.edges().iter().map(|e| e.label).collect();
    el.sort_unstable();
    let mut deg: Vec<usize> = (0..g.node_count()).map(|v| g.degree(v)).collect();
    deg.sort_unstable();
    (g.node_count(), g.edge_count(), nl, el, deg)
}
