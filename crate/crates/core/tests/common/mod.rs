//! Helpers shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use skelcomp::graph::{are_isomorphic, enumerate_connected_subgraphs, subgraph_isomorphic, Graph, GraphDataset};
use skelcomp::miner::{pattern_to_graph, ComponentTable};

pub fn data_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Random simple graph with `n` nodes, each pair joined with probability `p`,
/// guaranteed at least one edge.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, node_labels: i32, edge_labels: i32) -> Graph {
    loop {
        let labels: Vec<i32> = (0..n).map(|_| rng.random_range(0..node_labels)).collect();
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(p) {
                    edges.push((u, v, rng.random_range(0..edge_labels)));
                }
            }
        }
        if !edges.is_empty() {
            return Graph::labeled(labels, &edges).unwrap();
        }
    }
}

/// Connected variant: a random spanning tree plus extra edges.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, extra: usize, node_labels: i32, edge_labels: i32) -> Graph {
    let labels: Vec<i32> = (0..n).map(|_| rng.random_range(0..node_labels)).collect();
    let mut edges: Vec<(usize, usize, i32)> = Vec::new();
    let has = |edges: &[(usize, usize, i32)], u: usize, v: usize| {
        edges.iter().any(|&(a, b, _)| (a, b) == (u, v) || (a, b) == (v, u))
    };
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.push((u, v, rng.random_range(0..edge_labels)));
    }
    for _ in 0..extra {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v && !has(&edges, u, v) {
            edges.push((u, v, rng.random_range(0..edge_labels)));
        }
    }
    Graph::labeled(labels, &edges).unwrap()
}

/// Up to 8 graphs of up to 7 nodes, up to 3 node labels.
pub fn random_dataset(rng: &mut ChaCha8Rng) -> GraphDataset {
    let count = rng.random_range(2..=8);
    let node_labels = rng.random_range(1..=3);
    let edge_labels = rng.random_range(1..=2);
    let graphs = (0..count)
        .map(|_| {
            let n = rng.random_range(2..=7);
            let p = rng.random_range(0.25..0.6);
            random_graph(rng, n, p, node_labels, edge_labels)
        })
        .collect();
    GraphDataset::from_graphs("random", graphs).unwrap()
}

/// Brute-force frequent patterns: all connected edge subsets of every graph,
/// deduplicated up to isomorphism, supports counted with the subgraph oracle.
pub struct PatternOracle {
    pub candidates: Vec<(Graph, usize)>,
    pub graph_count: usize,
}

impl PatternOracle {
    pub fn new(ds: &GraphDataset, max_edges: usize) -> Self {
        let mut candidates: Vec<Graph> = Vec::new();
        for g in ds.graphs() {
            for sub in enumerate_connected_subgraphs(g, max_edges).unwrap() {
                if !candidates.iter().any(|c| are_isomorphic(c, &sub).unwrap()) {
                    candidates.push(sub);
                }
            }
        }
        let candidates = candidates
            .into_iter()
            .map(|c| {
                let support = ds.graphs().iter().filter(|g| subgraph_isomorphic(&c, g).unwrap()).count();
                (c, support)
            })
            .collect();
        PatternOracle { candidates, graph_count: ds.len() }
    }

    pub fn frequent(&self, theta: f64) -> Vec<(Graph, usize)> {
        let need = theta * self.graph_count as f64 - 1e-9;
        self.candidates.iter().filter(|(_, s)| *s as f64 >= need).cloned().collect()
    }
}

/// Describes the first difference between mined and oracle pattern sets, if
/// any. Patterns are matched by isomorphism and must agree on support.
pub fn compare_patterns(mined: &ComponentTable, oracle: &[(Graph, usize)], graph_count: usize) -> Option<String> {
    if mined.len() != oracle.len() {
        return Some(format!("mined {} patterns, oracle {}", mined.len(), oracle.len()));
    }
    let mut used = vec![false; oracle.len()];
    for p in &mined.vocabulary {
        let g = pattern_to_graph(&p.code).unwrap();
        let count = (p.support * graph_count as f64).round() as usize;
        if count != p.supporting_graphs.len() {
            return Some(format!("{}: support {} but {} supporting graphs", p.code, p.support, p.supporting_graphs.len()));
        }
        let hit = oracle.iter().enumerate().position(|(k, (o, s))| !used[k] && *s == count && are_isomorphic(&g, o).unwrap());
        match hit {
            Some(k) => used[k] = true,
            None => return Some(format!("mined pattern {} (support {count}) has no oracle match", p.code)),
        }
    }
    None
}
