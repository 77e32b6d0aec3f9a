//! Reader and writer for the multi-file benchmark layout:
//!
//! ```text
//! {name}_A.txt                 1-based global node id pairs, one arc per line
//! {name}_graph_indicator.txt   1-based graph id of every node
//! {name}_graph_labels.txt      class label of every graph
//! {name}_node_labels.txt       optional, one label per node
//! {name}_edge_labels.txt       optional, one label per arc of _A.txt
//! {name}_edge_attributes.txt   optional, first column read as the edge weight
//! ```
//!
//! Undirected edges normally appear as both arcs; each pair is kept once.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{DatasetError, Edge, Graph, GraphDataset, Label};

#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    pub allow_self_loops: bool,
}

pub fn load_tu_dataset(dir: impl AsRef<Path>, name: &str) -> Result<GraphDataset, DatasetError> {
    load_tu_dataset_with(dir, name, LoadOptions::default())
}

struct Lines {
    file: String,
    rows: Vec<(usize, String)>,
}

fn read_lines(dir: &Path, name: &str, suffix: &str, required: bool) -> Result<Option<Lines>, DatasetError> {
    let file = format!("{name}_{suffix}.txt");
    let path = dir.join(&file);
    if !path.is_file() {
        return if required { Err(DatasetError::MissingFile(path)) } else { Ok(None) };
    }
    let text = fs::read_to_string(&path)
        .map_err(|source| DatasetError::Io { path: path.display().to_string(), source })?;
    let rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    Ok(Some(Lines { file, rows }))
}

fn malformed(file: &str, line: usize, message: impl Into<String>) -> DatasetError {
    DatasetError::Malformed { file: file.to_string(), line, message: message.into() }
}

fn parse_field<T: std::str::FromStr>(file: &str, line: usize, field: &str) -> Result<T, DatasetError> {
    field.trim().parse().map_err(|_| malformed(file, line, format!("cannot parse {field:?}")))
}

impl Lines {
    fn single_column<T: std::str::FromStr>(&self) -> Result<Vec<T>, DatasetError> {
        self.rows
            .iter()
            .map(|(line, text)| {
                let first = text.split(',').next().unwrap_or_default();
                parse_field(&self.file, *line, first)
            })
            .collect()
    }

    fn expect_len(&self, n: usize, what: &str) -> Result<(), DatasetError> {
        if self.rows.len() != n {
            let line = self.rows.last().map_or(0, |r| r.0);
            return Err(malformed(
                &self.file,
                line,
                format!("expected {n} lines ({what}), found {}", self.rows.len()),
            ));
        }
        Ok(())
    }
}

pub fn load_tu_dataset_with(
    dir: impl AsRef<Path>,
    name: &str,
    options: LoadOptions,
) -> Result<GraphDataset, DatasetError> {
    let dir = dir.as_ref();
    let arcs = read_lines(dir, name, "A", true)?.unwrap();
    let indicator = read_lines(dir, name, "graph_indicator", true)?.unwrap();
    let graph_labels = read_lines(dir, name, "graph_labels", true)?.unwrap();
    let node_labels = read_lines(dir, name, "node_labels", false)?;
    let edge_labels = read_lines(dir, name, "edge_labels", false)?;
    let edge_attrs = read_lines(dir, name, "edge_attributes", false)?;

    let classes: Vec<i32> = graph_labels.single_column()?;
    let n_graphs = classes.len();

    // global node (0-based) -> (graph, local id)
    let mut location = Vec::with_capacity(indicator.rows.len());
    let mut per_graph_labels: Vec<Vec<Label>> = vec![Vec::new(); n_graphs];
    let labels: Option<Vec<Label>> = match &node_labels {
        Some(lines) => {
            lines.expect_len(indicator.rows.len(), "one per node")?;
            Some(lines.single_column()?)
        }
        None => None,
    };
    for (pos, (line, text)) in indicator.rows.iter().enumerate() {
        let gid: usize = parse_field(&indicator.file, *line, text)?;
        if gid == 0 || gid > n_graphs {
            return Err(malformed(
                &indicator.file,
                *line,
                format!("graph id {gid} outside 1..={n_graphs}"),
            ));
        }
        let local = per_graph_labels[gid - 1].len();
        per_graph_labels[gid - 1].push(labels.as_ref().map_or(0, |l| l[pos]));
        location.push((gid - 1, local));
    }
    if let Some(empty) = per_graph_labels.iter().position(Vec::is_empty) {
        return Err(malformed(
            &graph_labels.file,
            graph_labels.rows[empty].0,
            format!("graph {} has no nodes", empty + 1),
        ));
    }

    let arc_labels: Option<Vec<Label>> = match &edge_labels {
        Some(lines) => {
            lines.expect_len(arcs.rows.len(), "one per arc")?;
            Some(lines.single_column()?)
        }
        None => None,
    };
    let weights: Option<Vec<f64>> = match &edge_attrs {
        Some(lines) => {
            lines.expect_len(arcs.rows.len(), "one per arc")?;
            Some(lines.single_column()?)
        }
        None => None,
    };

    let mut per_graph_edges: Vec<Vec<Edge>> = vec![Vec::new(); n_graphs];
    let mut seen = HashSet::with_capacity(arcs.rows.len());
    let n_nodes = location.len();
    for (pos, (line, text)) in arcs.rows.iter().enumerate() {
        let mut fields = text.split(',');
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(malformed(&arcs.file, *line, "expected two comma-separated node ids"));
        };
        let a: usize = parse_field(&arcs.file, *line, a)?;
        let b: usize = parse_field(&arcs.file, *line, b)?;
        for node in [a, b] {
            if node == 0 || node > n_nodes {
                return Err(malformed(
                    &arcs.file,
                    *line,
                    format!("node {node} outside 1..={n_nodes}"),
                ));
            }
        }
        let (ga, la) = location[a - 1];
        let (gb, lb) = location[b - 1];
        if ga != gb {
            return Err(malformed(
                &arcs.file,
                *line,
                format!("arc {a},{b} joins graphs {} and {}", ga + 1, gb + 1),
            ));
        }
        if la == lb && !options.allow_self_loops {
            return Err(malformed(&arcs.file, *line, format!("self-loop on node {a}")));
        }
        if !seen.insert((ga, la.min(lb), la.max(lb))) {
            continue;
        }
        let weight = weights.as_ref().map_or(1.0, |w| w[pos]);
        if !(weight > 0.0) {
            return Err(malformed(&arcs.file, *line, format!("non-positive weight {weight}")));
        }
        per_graph_edges[ga].push(Edge {
            u: la,
            v: lb,
            label: arc_labels.as_ref().map_or(0, |l| l[pos]),
            weight,
        });
    }

    let graphs = per_graph_labels
        .into_iter()
        .zip(per_graph_edges)
        .zip(classes)
        .enumerate()
        .map(|(id, ((labels, edges), class))| {
            Graph::build(id, labels, edges, class, options.allow_self_loops)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GraphDataset::new(name, graphs, node_labels.is_some(), edge_labels.is_some())?)
}

/// Writes `ds` in the multi-file layout under `dir`, using the dataset's name
/// as the file prefix. Node and edge label files are written when the dataset
/// declares them; edge attributes only when some weight differs from 1.
pub fn write_tu_dataset(ds: &GraphDataset, dir: impl AsRef<Path>) -> Result<(), DatasetError> {
    let dir = dir.as_ref();
    let mut arcs = String::new();
    let mut indicator = String::new();
    let mut classes = String::new();
    let mut node_labels = String::new();
    let mut edge_labels = String::new();
    let mut weights = String::new();
    let weighted = ds.graphs().iter().flat_map(Graph::edges).any(|e| e.weight != 1.0);
    let mut offset = 0;
    for g in ds.graphs() {
        let _ = writeln!(classes, "{}", g.class_label());
        for &label in g.node_labels() {
            let _ = writeln!(indicator, "{}", g.id() + 1);
            let _ = writeln!(node_labels, "{label}");
        }
        for e in g.edges() {
            let (u, v) = (e.u + offset + 1, e.v + offset + 1);
            let pairs: &[(usize, usize)] = if u == v { &[(u, v)] } else { &[(u, v), (v, u)] };
            for &(a, b) in pairs {
                let _ = writeln!(arcs, "{a}, {b}");
                let _ = writeln!(edge_labels, "{}", e.label);
                let _ = writeln!(weights, "{}", e.weight);
            }
        }
        offset += g.node_count();
    }
    let name = ds.name();
    let mut files = vec![("A", arcs), ("graph_indicator", indicator), ("graph_labels", classes)];
    if ds.has_node_labels() {
        files.push(("node_labels", node_labels));
    }
    if ds.has_edge_labels() {
        files.push(("edge_labels", edge_labels));
    }
    if weighted {
        files.push(("edge_attributes", weights));
    }
    fs::create_dir_all(dir)
        .map_err(|source| DatasetError::Io { path: dir.display().to_string(), source })?;
    for (suffix, body) in files {
        let path = dir.join(format!("{name}_{suffix}.txt"));
        fs::write(&path, body)
            .map_err(|source| DatasetError::Io { path: path.display().to_string(), source })?;
    }
    Ok(())
}
