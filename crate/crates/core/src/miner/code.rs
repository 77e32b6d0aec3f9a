//! DFS codes and the gSpan lexicographic order.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::graph::{Edge, Graph, Label};

use super::MinerError;

/// One edge of a DFS code: discovery indices plus the three labels.
///
/// `from < to` is a forward (tree) edge, `from > to` a backward edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DfsEdge {
    pub from: usize,
    pub to: usize,
    pub from_label: Label,
    pub edge_label: Label,
    pub to_label: Label,
}

impl DfsEdge {
    pub fn new(from: usize, to: usize, from_label: Label, edge_label: Label, to_label: Label) -> Self {
        DfsEdge { from, to, from_label, edge_label, to_label }
    }

    pub fn is_forward(&self) -> bool {
        self.from < self.to
    }

    fn labels(&self) -> (Label, Label, Label) {
        (self.from_label, self.edge_label, self.to_label)
    }
}

/// gSpan edge order.
///
/// Index pairs decide first:
/// * both forward: smaller `to` first, then larger `from`;
/// * both backward: smaller `from` first, then smaller `to`;
/// * backward `a` vs forward `b`: `a` first iff `a.from < b.to`;
/// * forward `a` vs backward `b`: `a` first iff `a.to <= b.from`.
///
/// Equal index pairs fall back to `(from_label, edge_label, to_label)`.
pub fn code_order(a: &DfsEdge, b: &DfsEdge) -> Ordering {
    if (a.from, a.to) == (b.from, b.to) {
        return a.labels().cmp(&b.labels());
    }
    let less = match (a.is_forward(), b.is_forward()) {
        (true, true) => a.to < b.to || (a.to == b.to && a.from > b.from),
        (false, false) => a.from < b.from || (a.from == b.from && a.to < b.to),
        (false, true) => a.from < b.to,
        (true, false) => a.to <= b.from,
    };
    if less {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

impl Ord for DfsEdge {
    fn cmp(&self, other: &Self) -> Ordering {
        code_order(self, other)
    }
}

impl PartialOrd for DfsEdge {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DfsEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{},{})",
            self.from, self.to, self.from_label, self.edge_label, self.to_label
        )
    }
}

/// Ordered edge sequence of a depth-first traversal. Compared edge by edge
/// with [`code_order`]; a proper prefix sorts first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DfsCode(pub Vec<DfsEdge>);

impl DfsCode {
    pub fn edges(&self) -> &[DfsEdge] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.0.iter().map(|e| e.from.max(e.to) + 1).max().unwrap_or(0)
    }

    pub fn push(&mut self, e: DfsEdge) {
        self.0.push(e);
    }

    pub fn extended(&self, e: DfsEdge) -> DfsCode {
        let mut next = self.clone();
        next.push(e);
        next
    }

    /// Vertices of the rightmost path, rightmost vertex first, root last.
    pub fn rightmost_path(&self) -> Vec<usize> {
        let n = self.node_count();
        if n == 0 {
            return Vec::new();
        }
        let mut parent = vec![usize::MAX; n];
        for e in self.0.iter().filter(|e| e.is_forward()) {
            parent[e.to] = e.from;
        }
        let mut path = vec![n - 1];
        let mut v = n - 1;
        while parent[v] != usize::MAX {
            v = parent[v];
            path.push(v);
        }
        path
    }

    /// Checks that the code could come from a depth-first traversal with
    /// rightmost-path growth, and returns the node labels it implies.
    pub fn validate(&self) -> Result<Vec<Label>, MinerError> {
        let bad = |k: usize, why: &str| MinerError::MalformedCode(format!("edge {k} of {self}: {why}"));
        let first = self.0.first().ok_or_else(|| MinerError::MalformedCode("empty code".into()))?;
        if (first.from, first.to) != (0, 1) {
            return Err(bad(0, "first edge must be (0,1)"));
        }
        let mut labels = vec![first.from_label, first.to_label];
        let mut prefix = DfsCode(vec![*first]);
        let mut present = std::collections::HashSet::from([(0, 1)]);
        for (k, e) in self.0.iter().enumerate().skip(1) {
            let path = prefix.rightmost_path();
            let rightmost = path[0];
            if e.is_forward() {
                if e.to != labels.len() {
                    return Err(bad(k, "forward edge must discover the next index"));
                }
                if !path.contains(&e.from) {
                    return Err(bad(k, "forward edge must grow from the rightmost path"));
                }
                if labels[e.from] != e.from_label {
                    return Err(bad(k, "inconsistent node label"));
                }
                labels.push(e.to_label);
            } else {
                if e.from != rightmost || e.from == e.to {
                    return Err(bad(k, "backward edge must leave the rightmost vertex"));
                }
                if !path.contains(&e.to) {
                    return Err(bad(k, "backward edge must end on the rightmost path"));
                }
                if labels[e.from] != e.from_label || labels[e.to] != e.to_label {
                    return Err(bad(k, "inconsistent node label"));
                }
            }
            if !present.insert((e.from.min(e.to), e.from.max(e.to))) {
                return Err(bad(k, "duplicate edge"));
            }
            prefix.push(*e);
        }
        Ok(labels)
    }

    /// Materializes the pattern: node `i` is DFS index `i`.
    pub fn to_graph(&self) -> Result<Graph, MinerError> {
        let labels = self.validate()?;
        let edges = self.0.iter().map(|e| Edge::labeled(e.from, e.to, e.edge_label)).collect();
        Graph::new(0, labels, edges, 0).map_err(|e| MinerError::MalformedCode(e.to_string()))
    }
}

impl fmt::Display for DfsCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|e| write!(f, "{e}"))
    }
}

impl FromStr for DfsCode {
    type Err = MinerError;

    fn from_str(s: &str) -> Result<Self, MinerError> {
        let err = || MinerError::Parse(format!("bad DFS code {s:?}"));
        let s = s.trim();
        let inner = s.strip_prefix('(').and_then(|x| x.strip_suffix(')')).ok_or_else(err)?;
        inner
            .split(")(")
            .map(|tuple| {
                let v = tuple
                    .split(',')
                    .map(|x| x.trim().parse::<i64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| err())?;
                match v.as_slice() {
                    &[i, j, li, le, lj] if i >= 0 && j >= 0 => Ok(DfsEdge::new(
                        i as usize,
                        j as usize,
                        li as Label,
                        le as Label,
                        lj as Label,
                    )),
                    _ => Err(err()),
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(DfsCode)
    }
}

/// Partial embedding of a code prefix into a graph.
#[derive(Clone, Debug)]
pub(crate) struct Embedding {
    pub graph: usize,
    /// DFS index -> graph node
    pub nodes: Vec<usize>,
    /// graph edge ids already matched
    pub edges: Vec<usize>,
}

impl Embedding {
    pub fn uses_edge(&self, e: usize) -> bool {
        self.edges.contains(&e)
    }

    pub fn index_of(&self, node: usize) -> Option<usize> {
        self.nodes.iter().position(|&x| x == node)
    }

    pub fn grow(&self, node: Option<usize>, edge: usize) -> Embedding {
        let mut next = self.clone();
        next.nodes.extend(node);
        next.edges.push(edge);
        next
    }
}

/// Every possible next edge of `code` in `emb`, under rightmost-path growth:
/// backward edges from the rightmost vertex and forward edges from any
/// rightmost-path vertex. Returned with the grown embedding.
pub(crate) fn extensions<'a>(
    g: &'a Graph,
    emb: &'a Embedding,
    path: &'a [usize],
) -> impl Iterator<Item = (DfsEdge, Embedding)> + 'a {
    let rightmost = path[0];
    let next = emb.nodes.len();
    let rm_node = emb.nodes[rightmost];
    let backward = g.adjacency(rm_node).iter().filter_map(move |&(y, e)| {
        if emb.uses_edge(e) || y == rm_node {
            return None;
        }
        let to = emb.index_of(y)?;
        path.contains(&to).then(|| {
            let de = DfsEdge::new(rightmost, to, g.node_label(rm_node), g.edge(e).label, g.node_label(y));
            (de, emb.grow(None, e))
        })
    });
    let forward = path.iter().flat_map(move |&p| {
        let x = emb.nodes[p];
        g.adjacency(x).iter().filter_map(move |&(y, e)| {
            if emb.index_of(y).is_some() {
                return None;
            }
            let de = DfsEdge::new(p, next, g.node_label(x), g.edge(e).label, g.node_label(y));
            Some((de, emb.grow(Some(y), e)))
        })
    });
    backward.chain(forward)
}

/// All minimal one-edge codes of `g` with their embeddings.
pub(crate) fn seed_edges(g: &Graph) -> impl Iterator<Item = (DfsEdge, Embedding)> + '_ {
    g.edges().iter().enumerate().flat_map(move |(idx, e)| {
        let (lu, lv) = (g.node_label(e.u), g.node_label(e.v));
        let mut out = Vec::with_capacity(2);
        if e.u == e.v {
            return out.into_iter();
        }
        for (a, b, la, lb) in [(e.u, e.v, lu, lv), (e.v, e.u, lv, lu)] {
            if la <= lb {
                let emb = Embedding { graph: g.id(), nodes: vec![a, b], edges: vec![idx] };
                out.push((DfsEdge::new(0, 1, la, e.label, lb), emb));
            }
        }
        out.into_iter()
    })
}

/// True iff no depth-first traversal of the pattern encoded by `code`
/// yields a smaller code.
///
/// Regenerates the minimum code greedily: at every position it keeps only
/// the embeddings that realize the smallest possible next edge, and stops as
/// soon as that edge is smaller than the one in `code`.
pub fn is_minimal(code: &DfsCode) -> Result<bool, MinerError> {
    let g = code.to_graph()?;
    let mut best: Option<DfsEdge> = None;
    let mut frontier: Vec<Embedding> = Vec::new();
    for (edge, emb) in seed_edges(&g) {
        match best.map(|b| code_order(&edge, &b)) {
            None | Some(Ordering::Less) => {
                best = Some(edge);
                frontier.clear();
                frontier.push(emb);
            }
            Some(Ordering::Equal) => frontier.push(emb),
            Some(Ordering::Greater) => {}
        }
    }
    let Some(first) = best else { return Ok(false) };
    if first != code.0[0] {
        return Ok(false);
    }
    let mut prefix = DfsCode(vec![first]);
    for target in &code.0[1..] {
        let path = prefix.rightmost_path();
        let mut best: Option<DfsEdge> = None;
        let mut next = Vec::new();
        for emb in &frontier {
            for (edge, grown) in extensions(&g, emb, &path) {
                match best.map(|b| code_order(&edge, &b)) {
                    None | Some(Ordering::Less) => {
                        best = Some(edge);
                        next.clear();
                        next.push(grown);
                    }
                    Some(Ordering::Equal) => next.push(grown),
                    Some(Ordering::Greater) => {}
                }
            }
        }
        match best {
            Some(edge) if edge == *target => {
                prefix.push(edge);
                frontier = next;
            }
            _ => return Ok(false),
        }
    }
    Ok(true)
}
