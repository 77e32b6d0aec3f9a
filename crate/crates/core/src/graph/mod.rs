//! Labeled undirected graphs and benchmark datasets.

mod iso;
mod tu;

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

pub use iso::{are_isomorphic, enumerate_connected_subgraphs, subgraph_isomorphic};
pub use iso::{ORACLE_MAX_EDGES, ORACLE_MAX_NODES};
pub use tu::{load_tu_dataset, load_tu_dataset_with, write_tu_dataset, LoadOptions};

/// Categorical node or edge label.
pub type Label = i32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("edge {edge} references node {node}, but the graph has {nodes} nodes")]
    DanglingEdge { edge: usize, node: usize, nodes: usize },
    #[error("duplicate undirected edge ({u},{v})")]
    DuplicateEdge { u: usize, v: usize },
    #[error("self-loop on node {0} while self-loops are disabled")]
    SelfLoop(usize),
    #[error("edge ({u},{v}) has non-positive weight {weight}")]
    NonPositiveWeight { u: usize, v: usize, weight: f64 },
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("oracle limits exceeded: {0}")]
    OracleScale(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing dataset file {}", .0.display())]
    MissingFile(std::path::PathBuf),
    #[error("malformed dataset file {file}, line {line}: {message}")]
    Malformed { file: String, line: usize, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// An undirected edge between two node ids.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub label: Label,
    /// Recorded from the input when present; no algorithm reads it.
    pub weight: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize) -> Self {
        Edge { u, v, label: 0, weight: 1.0 }
    }

    pub fn labeled(u: usize, v: usize, label: Label) -> Self {
        Edge { u, v, label, weight: 1.0 }
    }

    /// The endpoint opposite to `x`.
    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

/// Labeled undirected graph with contiguous node ids `0..n`.
///
/// Immutable once built. Adjacency lists are kept sorted by neighbor id so
/// every traversal is deterministic.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    id: usize,
    node_labels: Vec<Label>,
    edges: Vec<Edge>,
    class_label: i32,
    // (neighbor, edge index)
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Graph {
    pub fn new(
        id: usize,
        node_labels: Vec<Label>,
        edges: Vec<Edge>,
        class_label: i32,
    ) -> Result<Self, GraphError> {
        Self::build(id, node_labels, edges, class_label, false)
    }

    pub fn build(
        id: usize,
        node_labels: Vec<Label>,
        edges: Vec<Edge>,
        class_label: i32,
        allow_self_loops: bool,
    ) -> Result<Self, GraphError> {
        let n = node_labels.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = HashSet::with_capacity(edges.len());
        for (idx, e) in edges.iter().enumerate() {
            for node in [e.u, e.v] {
                if node >= n {
                    return Err(GraphError::DanglingEdge { edge: idx, node, nodes: n });
                }
            }
            if e.u == e.v && !allow_self_loops {
                return Err(GraphError::SelfLoop(e.u));
            }
            // also rejects NaN
            if !(e.weight > 0.0) {
                return Err(GraphError::NonPositiveWeight { u: e.u, v: e.v, weight: e.weight });
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(GraphError::DuplicateEdge { u: e.u, v: e.v });
            }
            adjacency[e.u].push((e.v, idx));
            if e.u != e.v {
                adjacency[e.v].push((e.u, idx));
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph { id, node_labels, edges, class_label, adjacency })
    }

    /// Unlabeled graph (all labels 0, class 0) from an edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        Self::new(0, vec![0; n], edges.iter().map(|&(u, v)| Edge::new(u, v)).collect(), 0)
    }

    /// Graph with node labels and labeled edges `(u, v, edge_label)`.
    pub fn labeled(
        node_labels: Vec<Label>,
        edges: &[(usize, usize, Label)],
    ) -> Result<Self, GraphError> {
        let edges = edges.iter().map(|&(u, v, l)| Edge::labeled(u, v, l)).collect();
        Self::new(0, node_labels, edges, 0)
    }

    pub fn with_id(mut self, id: usize) -> Self {
        self.id = id;
        self
    }

    pub fn with_class(mut self, class_label: i32) -> Self {
        self.class_label = class_label;
        self
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn class_label(&self) -> i32 {
        self.class_label
    }

    pub fn node_count(&self) -> usize {
        self.node_labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_label(&self, v: usize) -> Label {
        self.node_labels[v]
    }

    pub fn node_labels(&self) -> &[Label] {
        &self.node_labels
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> &Edge {
        &self.edges[idx]
    }

    /// `(neighbor, edge index)` pairs of `v`, sorted by neighbor.
    pub fn adjacency(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v].iter().map(|&(w, _)| w)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        let (a, b) = if self.degree(u) <= self.degree(v) { (u, v) } else { (v, u) };
        self.adjacency[a]
            .binary_search_by_key(&b, |&(w, _)| w)
            .ok()
            .map(|pos| self.adjacency[a][pos].1)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }
}

/// An ordered collection of graphs sharing one label space.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphDataset {
    name: String,
    graphs: Vec<Graph>,
    class_count: usize,
    has_node_labels: bool,
    has_edge_labels: bool,
}

impl GraphDataset {
    pub fn new(
        name: impl Into<String>,
        graphs: Vec<Graph>,
        has_node_labels: bool,
        has_edge_labels: bool,
    ) -> Result<Self, GraphError> {
        if graphs.is_empty() {
            return Err(GraphError::InvalidDataset("dataset has no graphs".into()));
        }
        if let Some((pos, g)) = graphs.iter().enumerate().find(|(pos, g)| g.id() != *pos) {
            return Err(GraphError::InvalidDataset(format!(
                "graph at position {pos} has id {}",
                g.id()
            )));
        }
        let class_count = graphs.iter().map(Graph::class_label).collect::<BTreeSet<_>>().len();
        Ok(GraphDataset {
            name: name.into(),
            graphs,
            class_count,
            has_node_labels,
            has_edge_labels,
        })
    }

    /// Builds a dataset from graphs in order, renumbering their ids `0..N`.
    pub fn from_graphs(name: impl Into<String>, graphs: Vec<Graph>) -> Result<Self, GraphError> {
        let graphs: Vec<Graph> =
            graphs.into_iter().enumerate().map(|(i, g)| g.with_id(i)).collect();
        let has_node_labels = graphs.iter().any(|g| g.node_labels().iter().any(|&l| l != 0));
        let has_edge_labels = graphs.iter().any(|g| g.edges().iter().any(|e| e.label != 0));
        Self::new(name, graphs, has_node_labels, has_edge_labels)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn graph(&self, id: usize) -> &Graph {
        &self.graphs[id]
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn has_node_labels(&self) -> bool {
        self.has_node_labels
    }

    pub fn has_edge_labels(&self) -> bool {
        self.has_edge_labels
    }

    /// Class label of every graph, in graph id order.
    pub fn class_labels(&self) -> Vec<i32> {
        self.graphs.iter().map(Graph::class_label).collect()
    }

    pub fn mean_node_count(&self) -> f64 {
        self.graphs.iter().map(Graph::node_count).sum::<usize>() as f64 / self.len() as f64
    }

    pub fn mean_edge_count(&self) -> f64 {
        self.graphs.iter().map(Graph::edge_count).sum::<usize>() as f64 / self.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(
            Graph::from_edges(2, &[(0, 2)]),
            Err(GraphError::DanglingEdge { edge: 0, node: 2, nodes: 2 })
        );
        assert_eq!(
            Graph::from_edges(2, &[(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge { u: 1, v: 0 })
        );
        assert_eq!(Graph::from_edges(2, &[(1, 1)]), Err(GraphError::SelfLoop(1)));
        let heavy = Edge { u: 0, v: 1, label: 0, weight: 0.0 };
        assert!(matches!(
            Graph::new(0, vec![0, 0], vec![heavy], 0),
            Err(GraphError::NonPositiveWeight { .. })
        ));
    }

    #[test]
    fn self_loops_when_enabled() {
        let g = Graph::build(0, vec![0, 0], vec![Edge::new(0, 0), Edge::new(0, 1)], 0, true)
            .unwrap();
        assert_eq!(g.neighbors(0).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(g.find_edge(0, 0), Some(0));
    }

    #[test]
    fn adjacency_is_sorted() {
        let g = Graph::from_edges(4, &[(0, 3), (0, 1), (2, 0)]).unwrap();
        assert_eq!(g.neighbors(0).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(g.find_edge(3, 0), Some(0));
        assert_eq!(g.find_edge(1, 3), None);
        assert!(g.is_connected());
        assert!(!Graph::from_edges(3, &[(0, 1)]).unwrap().is_connected());
    }

    #[test]
    fn dataset_requires_contiguous_ids() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert!(GraphDataset::new("x", vec![g.clone().with_id(1)], false, false).is_err());
        assert!(GraphDataset::new("x", vec![], false, false).is_err());
        let ds = GraphDataset::from_graphs("x", vec![g.clone(), g.with_class(1)]).unwrap();
        assert_eq!(ds.class_count(), 2);
        assert_eq!(ds.graph(1).id(), 1);
    }
}
